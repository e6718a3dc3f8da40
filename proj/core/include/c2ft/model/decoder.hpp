#pragma once

#include "c2ft/model/config.hpp"
#include "c2ft/model/layers.hpp"

namespace c2ft::model {

// D = sigmoid(MLP(MSA(H, F))): one cross-attention block whose g queries are
// the rows of the learnable matrix H and whose keys/values are the view
// embeddings. Each query token becomes one c_d^3 cube of the output volume.
class VolumeDecoder {
   public:
    template <std::floating_point T>
    static VolumeDecoder create(ParameterStore<T>& store, const ModelConfig& cfg, Rng& rng);

    // F [N, W] -> pre-sigmoid volume [V, V, V]. EmptyViewList, WidthMismatch.
    template <std::floating_point T>
    ad::Tensor<T> decode_logits(const ParameterStore<T>& store, const ad::Tensor<T>& views,
                                ad::Tensor<T>* attention = nullptr) const;
    template <std::floating_point T>
    ad::Tensor<T> decode(const ParameterStore<T>& store, const ad::Tensor<T>& views) const;

    ParamIndex queries() const { return h_; }
    std::size_t tokens() const { return tokens_; }
    std::size_t width() const { return width_; }

   private:
    ParamIndex h_ = 0;
    Attention cross_;
    Mlp mlp_;
    std::size_t side_ = 0;
    std::size_t cube_ = 0;
    std::size_t tokens_ = 0;
    std::size_t width_ = 0;
};

}  // namespace c2ft::model
