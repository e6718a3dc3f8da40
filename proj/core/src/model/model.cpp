#include "c2ft/model/model.hpp"

#include "c2ft/autodiff/ops.hpp"

namespace c2ft::model {

template <std::floating_point T>
Model<T>::Model(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    cfg_.validate();
    Rng rng(seed);
    encoder_ = ViewEncoder::create(store_, cfg_, rng);
    decoder_ = VolumeDecoder::create(store_, cfg_, rng);
    if (cfg_.refiner_enabled) refiner_ = Refiner::create(store_, cfg_, rng);
}

template <std::floating_point T>
ForwardResult<T> Model<T>::forward(const ad::Tensor<T>& images, ForwardTrace<T>* trace) const {
    ForwardResult<T> out;
    out.embedding = encoder_.encode(store_, images, trace ? &trace->encoder_attention : nullptr);
    auto coarse_logits = decoder_.decode_logits(store_, out.embedding, trace ? &trace->decoder_attention : nullptr);
    out.coarse = ad::sigmoid(coarse_logits);
    if (!refiner_) {
        out.volume = out.coarse;
        return out;
    }
    auto logits = refiner_->refine_logits(store_, out.coarse, trace ? &trace->refiner_tokens : nullptr);
    if (cfg_.refiner_residual) logits = logits + coarse_logits;
    out.volume = ad::sigmoid(logits);
    return out;
}

template class Model<float>;
template class Model<double>;

}  // namespace c2ft::model
