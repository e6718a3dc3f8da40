#include "c2ft/model/decoder.hpp"

#include "c2ft/autodiff/ops.hpp"
#include "c2ft/error.hpp"
#include "c2ft/voxel/cubes.hpp"

namespace c2ft::model {

template <std::floating_point T>
VolumeDecoder VolumeDecoder::create(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng) {
    cfg.validate();
    VolumeDecoder d;
    d.side_ = cfg.volume_side;
    d.cube_ = cfg.decoder_cube;
    d.tokens_ = cfg.decoder_tokens();
    d.width_ = cfg.embedding_width();
    d.h_ = store.add("decoder.H", init_normal<T>({d.tokens_, d.width_}, 0.02, rng));
    d.cross_ = Attention::create(store, "decoder.attn", d.width_, cfg.decoder_heads, rng);
    const std::size_t voxels = d.cube_ * d.cube_ * d.cube_;
    d.mlp_ = Mlp::create(store, "decoder.mlp", d.width_, d.width_ * cfg.mlp_ratio, voxels, rng);
    return d;
}

template <std::floating_point T>
ad::Tensor<T> VolumeDecoder::decode_logits(const ParameterStore<T>& store, const ad::Tensor<T>& views,
                                           ad::Tensor<T>* attention) const {
    if (views.rank() != 2) fail(ErrorCode::ShapeMismatch, "decoder expects [N, W], got " + ad::shape_str(views.shape()));
    if (views.dim(0) == 0) fail(ErrorCode::EmptyViewList, "decoder received no views");
    if (views.dim(1) != width_)
        fail(ErrorCode::WidthMismatch,
             "view width " + std::to_string(views.dim(1)) + " does not match H width " + std::to_string(width_));
    auto attended = cross_.forward(store, store[h_], views, attention);
    auto logits = mlp_.forward(store, attended);  // [g, c_d^3]
    return vox::assemble_cubes(logits, side_, cube_);
}

template <std::floating_point T>
ad::Tensor<T> VolumeDecoder::decode(const ParameterStore<T>& store, const ad::Tensor<T>& views) const {
    return ad::sigmoid(decode_logits(store, views));
}

template VolumeDecoder VolumeDecoder::create(ParameterStore<float>&, const ModelConfig&, Rng&);
template VolumeDecoder VolumeDecoder::create(ParameterStore<double>&, const ModelConfig&, Rng&);
template ad::Tensor<float> VolumeDecoder::decode_logits(const ParameterStore<float>&, const ad::Tensor<float>&,
                                                        ad::Tensor<float>*) const;
template ad::Tensor<double> VolumeDecoder::decode_logits(const ParameterStore<double>&, const ad::Tensor<double>&,
                                                         ad::Tensor<double>*) const;
template ad::Tensor<float> VolumeDecoder::decode(const ParameterStore<float>&, const ad::Tensor<float>&) const;
template ad::Tensor<double> VolumeDecoder::decode(const ParameterStore<double>&, const ad::Tensor<double>&) const;

}  // namespace c2ft::model
