#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "c2ft/model/config.hpp"
#include "c2ft/model/decoder.hpp"
#include "c2ft/model/encoder.hpp"
#include "c2ft/model/params.hpp"
#include "c2ft/model/refiner.hpp"

namespace c2ft::model {

template <std::floating_point T>
struct ForwardResult {
    ad::Tensor<T> embedding;  // [N, W]
    ad::Tensor<T> coarse;     // decoder output D, [V, V, V]
    ad::Tensor<T> volume;     // final output, [V, V, V]
};

template <std::floating_point T>
struct ForwardTrace {
    AttentionMaps<T> encoder_attention;
    ad::Tensor<T> decoder_attention;  // [heads, g, N]
    std::vector<std::pair<std::size_t, std::size_t>> refiner_tokens;
};

// Encoder -> decoder -> refiner. Parameters are created in that order from a
// single seeded engine, so (config, seed) fixes the initial weights.
template <std::floating_point T>
class Model {
   public:
    Model(const ModelConfig& cfg, std::uint64_t seed);

    // images [N, C, S, S]
    ForwardResult<T> forward(const ad::Tensor<T>& images, ForwardTrace<T>* trace = nullptr) const;

    const ModelConfig& config() const { return cfg_; }
    ParameterStore<T>& params() { return store_; }
    const ParameterStore<T>& params() const { return store_; }
    const ViewEncoder& encoder() const { return encoder_; }
    const VolumeDecoder& decoder() const { return decoder_; }
    const std::optional<Refiner>& refiner() const { return refiner_; }

   private:
    ModelConfig cfg_;
    ParameterStore<T> store_;
    ViewEncoder encoder_;
    VolumeDecoder decoder_;
    std::optional<Refiner> refiner_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace c2ft::model
