#include "c2ft/model/encoder.hpp"

#include "c2ft/autodiff/ops.hpp"
#include "c2ft/error.hpp"

namespace c2ft::model {

template <std::floating_point T>
Backbone Backbone::create(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng) {
    Backbone b;
    std::size_t in = cfg.image_channels;
    std::size_t out = cfg.backbone_channels;
    for (std::size_t i = 0; i < b.convs.size(); ++i) {
        const std::string name = "encoder.backbone.conv" + std::to_string(i);
        b.convs[i].weight = store.add(name + ".weight", init_xavier<T>({out, in, 3, 3}, in * 9, out * 9, rng));
        b.convs[i].bias = store.add(name + ".bias", ad::Tensor<T>::zeros({out}));
        in = out;
        out *= 2;
    }
    b.flatten = cfg.backbone_flatten;
    b.proj = Linear::create(store, "encoder.backbone.proj", cfg.backbone_features(), cfg.embed_dim, rng);
    return b;
}

template <std::floating_point T>
ad::Tensor<T> Backbone::forward(const ParameterStore<T>& store, const ad::Tensor<T>& images) const {
    ad::Tensor<T> x = images;
    for (const auto& c : convs) x = ad::gelu(ad::conv2d(x, store[c.weight], store[c.bias], 2, 1));
    const std::size_t n = x.dim(0);
    const std::size_t ch = x.dim(1);
    if (flatten) return proj.forward(store, ad::reshape(x, {n, ch * x.dim(2) * x.dim(3)}));
    auto pooled = ad::mean_axis(ad::reshape(x, {n, ch, x.dim(2) * x.dim(3)}), 2);
    return proj.forward(store, pooled);
}

template <std::floating_point T>
ViewEncoder ViewEncoder::create(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    ViewEncoder e;
    e.cfg_ = cfg;
    e.backbone_ = Backbone::create(store, cfg, rng);
    if (cfg.positional_embeddings)
        e.pos_ = store.add("encoder.pos", init_normal<T>({cfg.max_views, cfg.embed_dim}, 0.02, rng));
    for (std::size_t j = 0; j < cfg.encoder_blocks; ++j) {
        C2FBlock block;
        block.width = cfg.block_width(j);
        const std::string bname = "encoder.block" + std::to_string(j);
        for (std::size_t i = 0; i < cfg.encoder_layers; ++i) {
            const std::string lname = bname + ".layer" + std::to_string(i);
            EncoderLayer layer;
            layer.norm1 = LayerNorm::create(store, lname + ".norm1", block.width, cfg.norm_eps);
            layer.attn = Attention::create(store, lname + ".attn", block.width, cfg.block_heads(j), rng);
            layer.norm2 = LayerNorm::create(store, lname + ".norm2", block.width, cfg.norm_eps);
            layer.mlp =
                Mlp::create(store, lname + ".mlp", block.width, block.width * cfg.mlp_ratio, block.width, rng);
            block.layers.push_back(layer);
        }
        if (j + 1 < cfg.encoder_blocks)
            block.reduce = Linear::create(store, bname + ".reduce", block.width, block.width / 2, rng);
        e.blocks_.push_back(std::move(block));
    }
    e.output_width_ = cfg.embedding_width();
    e.final_norm_ = LayerNorm::create(store, "encoder.norm", e.output_width_, cfg.norm_eps);
    return e;
}

template <std::floating_point T>
ad::Tensor<T> ViewEncoder::embed_views(const ParameterStore<T>& store, const ad::Tensor<T>& images) const {
    if (images.rank() != 4 || images.dim(1) != cfg_.image_channels || images.dim(2) != cfg_.image_size ||
        images.dim(3) != cfg_.image_size)
        fail(ErrorCode::ShapeMismatch, "expected views [N, " + std::to_string(cfg_.image_channels) + ", " +
                                           std::to_string(cfg_.image_size) + ", " + std::to_string(cfg_.image_size) +
                                           "], got " + ad::shape_str(images.shape()));
    return backbone_.forward(store, images);
}

template <std::floating_point T>
BlockOutput<T> ViewEncoder::c2f_block(const ParameterStore<T>& store, std::size_t j, const ad::Tensor<T>& tokens,
                                      std::vector<ad::Tensor<T>>* attention) const {
    const C2FBlock& block = blocks_.at(j);
    if (tokens.rank() != 2 || tokens.dim(1) != block.width)
        fail(ErrorCode::ShapeMismatch, "block " + std::to_string(j) + " expects width " + std::to_string(block.width) +
                                           ", got " + ad::shape_str(tokens.shape()));
    if (block.reduce && block.width % 2 != 0)
        fail(ErrorCode::OddWidth, "cannot halve width " + std::to_string(block.width));
    ad::Tensor<T> p = tokens;
    for (const auto& layer : block.layers) {
        ad::Tensor<T> probs;
        const auto normed = layer.norm1.forward(store, p);
        auto attended = layer.attn.forward(store, normed, normed, attention ? &probs : nullptr);
        auto e_hat = attended + p;
        p = layer.mlp.forward(store, layer.norm2.forward(store, e_hat));
        if (attention) attention->push_back(probs);
    }
    BlockOutput<T> out;
    out.features = p;
    if (block.reduce) out.reduced = block.reduce->forward(store, p);
    return out;
}

template <std::floating_point T>
ad::Tensor<T> ViewEncoder::encode(const ParameterStore<T>& store, const ad::Tensor<T>& images,
                                  AttentionMaps<T>* attention) const {
    if (images.rank() >= 1 && images.dim(0) == 0) fail(ErrorCode::EmptyViewList, "no views supplied");
    if (images.rank() >= 1 && images.dim(0) > cfg_.max_views)
        fail(ErrorCode::TooManyViews,
             std::to_string(images.dim(0)) + " views exceed the limit of " + std::to_string(cfg_.max_views));
    auto p = embed_views(store, images);
    const std::size_t n = p.dim(0);
    if (pos_) p = p + ad::slice(store[*pos_], 0, 0, n);

    if (attention) attention->assign(blocks_.size(), {});
    std::vector<ad::Tensor<T>> collected;
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
        auto out = c2f_block(store, j, p, attention ? &(*attention)[j] : nullptr);
        collected.push_back(out.features);
        p = out.reduced;
    }
    return final_norm_.forward(store, ad::concat(std::span<const ad::Tensor<T>>(collected), 1));
}

#define C2FT_INSTANTIATE_ENCODER(T)                                                                                \
    template Backbone Backbone::create(ParameterStore<T>&, const ModelConfig&, Rng&);                               \
    template ad::Tensor<T> Backbone::forward(const ParameterStore<T>&, const ad::Tensor<T>&) const;                \
    template ViewEncoder ViewEncoder::create(ParameterStore<T>&, const ModelConfig&, Rng&);                         \
    template ad::Tensor<T> ViewEncoder::embed_views(const ParameterStore<T>&, const ad::Tensor<T>&) const;          \
    template BlockOutput<T> ViewEncoder::c2f_block(const ParameterStore<T>&, std::size_t, const ad::Tensor<T>&,     \
                                                   std::vector<ad::Tensor<T>>*) const;                              \
    template ad::Tensor<T> ViewEncoder::encode(const ParameterStore<T>&, const ad::Tensor<T>&, AttentionMaps<T>*) \
        const;

C2FT_INSTANTIATE_ENCODER(float)
C2FT_INSTANTIATE_ENCODER(double)

}  // namespace c2ft::model
