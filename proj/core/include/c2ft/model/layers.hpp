#pragma once

#include <string>

#include "c2ft/model/params.hpp"

namespace c2ft::model {

// y = x W + b with W [in, out]; x is [..., in].
struct Linear {
    ParamIndex weight = 0;
    ParamIndex bias = 0;
    std::size_t in = 0;
    std::size_t out = 0;

    template <std::floating_point T>
    static Linear create(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng);
    template <std::floating_point T>
    ad::Tensor<T> forward(const ParameterStore<T>& store, const ad::Tensor<T>& x) const;
};

struct LayerNorm {
    ParamIndex gain = 0;
    ParamIndex bias = 0;
    double eps = 1e-5;

    template <std::floating_point T>
    static LayerNorm create(ParameterStore<T>& store, const std::string& name, std::size_t width, double eps);
    template <std::floating_point T>
    ad::Tensor<T> forward(const ParameterStore<T>& store, const ad::Tensor<T>& x) const;
};

// Linear -> GELU -> Linear.
struct Mlp {
    Linear fc1;
    Linear fc2;

    template <std::floating_point T>
    static Mlp create(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t hidden,
                      std::size_t out, Rng& rng);
    template <std::floating_point T>
    ad::Tensor<T> forward(const ParameterStore<T>& store, const ad::Tensor<T>& x) const;
};

// Multi-head scaled dot-product attention. Queries come from `q_in` [Nq, w],
// keys and values from `kv_in` [Nk, w]; passing the same tensor twice gives
// self-attention. When `probs` is non-null it receives the attention
// probabilities [heads, Nq, Nk].
struct Attention {
    Linear q, k, v, o;
    std::size_t heads = 1;
    std::size_t width = 0;

    template <std::floating_point T>
    static Attention create(ParameterStore<T>& store, const std::string& name, std::size_t width, std::size_t heads,
                            Rng& rng);
    template <std::floating_point T>
    ad::Tensor<T> forward(const ParameterStore<T>& store, const ad::Tensor<T>& q_in, const ad::Tensor<T>& kv_in,
                          ad::Tensor<T>* probs = nullptr) const;
};

}  // namespace c2ft::model
