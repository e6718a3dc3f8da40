#include "c2ft/model/refiner.hpp"

#include "c2ft/autodiff/ops.hpp"
#include "c2ft/error.hpp"
#include "c2ft/voxel/cubes.hpp"

namespace c2ft::model {

template <std::floating_point T>
Refiner Refiner::create(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    Refiner r;
    r.side_ = cfg.volume_side;
    for (std::size_t l = 0; l < cfg.refiner_cubes.size(); ++l) {
        RefinerBlock b;
        b.cube = cfg.refiner_cubes[l];
        const std::size_t w = b.cube * b.cube * b.cube;
        const std::size_t n = cfg.volume_side / b.cube;
        const std::string bname = "refiner.block" + std::to_string(l);
        b.in = Linear::create(store, bname + ".in", w, w, rng);
        b.pos = store.add(bname + ".pos", init_normal<T>({n * n * n, w}, 0.02, rng));
        for (std::size_t k = 0; k < cfg.refiner_layers; ++k) {
            const std::string lname = bname + ".layer" + std::to_string(k);
            RefinerLayer layer;
            layer.norm1 = LayerNorm::create(store, lname + ".norm1", w, cfg.norm_eps);
            layer.attn = Attention::create(store, lname + ".attn", w, cfg.refiner_heads[l], rng);
            layer.norm2 = LayerNorm::create(store, lname + ".norm2", w, cfg.norm_eps);
            layer.mlp = Mlp::create(store, lname + ".mlp", w, w * cfg.mlp_ratio, w, rng);
            b.layers.push_back(layer);
        }
        b.out = Linear::create(store, bname + ".out", w, w, rng);
        r.blocks_.push_back(std::move(b));
    }
    return r;
}

template <std::floating_point T>
ad::Tensor<T> Refiner::block_tokens(const ParameterStore<T>& store, std::size_t l, const ad::Tensor<T>& tokens) const {
    const RefinerBlock& b = blocks_.at(l);
    const auto& pos = store[b.pos];
    if (tokens.rank() != 2 || tokens.shape() != pos.shape())
        fail(ErrorCode::WidthMismatch, "refiner block " + std::to_string(l) + " expects tokens " +
                                           ad::shape_str(pos.shape()) + ", got " + ad::shape_str(tokens.shape()));
    auto r = b.in.forward(store, tokens) + pos;
    for (const auto& layer : b.layers) {
        const auto normed = layer.norm1.forward(store, r);
        r = layer.attn.forward(store, normed, normed) + r;
        r = layer.mlp.forward(store, layer.norm2.forward(store, r)) + r;
    }
    return b.out.forward(store, r);
}

template <std::floating_point T>
ad::Tensor<T> Refiner::refine_logits(const ParameterStore<T>& store, const ad::Tensor<T>& volume,
                                     std::vector<std::pair<std::size_t, std::size_t>>* token_shapes) const {
    if (volume.numel() != side_ * side_ * side_)
        fail(ErrorCode::ShapeMismatch, "refiner expects a " + std::to_string(side_) + "^3 volume, got " +
                                           ad::shape_str(volume.shape()));
    ad::Tensor<T> current = volume;
    for (std::size_t l = 0; l < blocks_.size(); ++l) {
        const std::size_t c = blocks_[l].cube;
        auto tokens = vox::partition_cubes(current, side_, c);
        if (token_shapes) token_shapes->emplace_back(tokens.dim(0), tokens.dim(1));
        current = vox::assemble_cubes(block_tokens(store, l, tokens), side_, c);
    }
    return current;
}

template <std::floating_point T>
ad::Tensor<T> Refiner::refine(const ParameterStore<T>& store, const ad::Tensor<T>& volume) const {
    return ad::sigmoid(refine_logits(store, volume));
}

#define C2FT_INSTANTIATE_REFINER(T)                                                                               \
    template Refiner Refiner::create(ParameterStore<T>&, const ModelConfig&, Rng&);                                \
    template ad::Tensor<T> Refiner::block_tokens(const ParameterStore<T>&, std::size_t, const ad::Tensor<T>&) const; \
    template ad::Tensor<T> Refiner::refine_logits(const ParameterStore<T>&, const ad::Tensor<T>&,                  \
                                                  std::vector<std::pair<std::size_t, std::size_t>>*) const;        \
    template ad::Tensor<T> Refiner::refine(const ParameterStore<T>&, const ad::Tensor<T>&) const;

C2FT_INSTANTIATE_REFINER(float)
C2FT_INSTANTIATE_REFINER(double)

}  // namespace c2ft::model
