#include "c2ft/model/layers.hpp"

#include <array>
#include <cmath>

#include "c2ft/autodiff/ops.hpp"
#include "c2ft/error.hpp"

namespace c2ft::model {

template <std::floating_point T>
Linear Linear::create(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
    Linear l;
    l.in = in;
    l.out = out;
    l.weight = store.add(name + ".weight", init_xavier<T>({in, out}, in, out, rng));
    l.bias = store.add(name + ".bias", ad::Tensor<T>::zeros({out}));
    return l;
}

template <std::floating_point T>
ad::Tensor<T> Linear::forward(const ParameterStore<T>& store, const ad::Tensor<T>& x) const {
    return ad::matmul(x, store[weight]) + store[bias];
}

template <std::floating_point T>
LayerNorm LayerNorm::create(ParameterStore<T>& store, const std::string& name, std::size_t width, double eps) {
    LayerNorm n;
    n.eps = eps;
    n.gain = store.add(name + ".gain", ad::Tensor<T>::full({width}, T(1)));
    n.bias = store.add(name + ".bias", ad::Tensor<T>::zeros({width}));
    return n;
}

template <std::floating_point T>
ad::Tensor<T> LayerNorm::forward(const ParameterStore<T>& store, const ad::Tensor<T>& x) const {
    return ad::layer_norm(x, store[gain], store[bias], static_cast<T>(eps));
}

template <std::floating_point T>
Mlp Mlp::create(ParameterStore<T>& store, const std::string& name, std::size_t in, std::size_t hidden, std::size_t out,
                Rng& rng) {
    Mlp m;
    m.fc1 = Linear::create(store, name + ".fc1", in, hidden, rng);
    m.fc2 = Linear::create(store, name + ".fc2", hidden, out, rng);
    return m;
}

template <std::floating_point T>
ad::Tensor<T> Mlp::forward(const ParameterStore<T>& store, const ad::Tensor<T>& x) const {
    return fc2.forward(store, ad::gelu(fc1.forward(store, x)));
}

template <std::floating_point T>
Attention Attention::create(ParameterStore<T>& store, const std::string& name, std::size_t width, std::size_t heads,
                            Rng& rng) {
    if (heads == 0 || width % heads != 0)
        fail(ErrorCode::InvalidArgument, name + ": heads must divide width " + std::to_string(width));
    Attention a;
    a.width = width;
    a.heads = heads;
    a.q = Linear::create(store, name + ".q", width, width, rng);
    a.k = Linear::create(store, name + ".k", width, width, rng);
    a.v = Linear::create(store, name + ".v", width, width, rng);
    a.o = Linear::create(store, name + ".o", width, width, rng);
    return a;
}

template <std::floating_point T>
ad::Tensor<T> Attention::forward(const ParameterStore<T>& store, const ad::Tensor<T>& q_in, const ad::Tensor<T>& kv_in,
                                 ad::Tensor<T>* probs) const {
    if (q_in.rank() != 2 || kv_in.rank() != 2 || q_in.dim(1) != width || kv_in.dim(1) != width)
        fail(ErrorCode::ShapeMismatch, "attention expects [N, " + std::to_string(width) + "] inputs, got " +
                                           ad::shape_str(q_in.shape()) + " and " + ad::shape_str(kv_in.shape()));
    const std::size_t nq = q_in.dim(0);
    const std::size_t nk = kv_in.dim(0);
    const std::size_t dh = width / heads;
    static constexpr std::array<std::size_t, 3> kSplitHeads{1, 0, 2};

    // [N, w] -> [heads, N, dh]
    auto heads_first = [&](const ad::Tensor<T>& x, std::size_t n) {
        return ad::permute(ad::reshape(x, {n, heads, dh}), std::span<const std::size_t>(kSplitHeads));
    };
    auto qh = heads_first(q.forward(store, q_in), nq);
    auto kh = heads_first(k.forward(store, kv_in), nk);
    auto vh = heads_first(v.forward(store, kv_in), nk);

    auto scores = ad::scale(ad::matmul(qh, ad::transpose(kh, 1, 2)), static_cast<T>(1.0 / std::sqrt(double(dh))));
    auto p = ad::softmax(scores, 2);
    if (probs) *probs = p;
    auto ctx = ad::matmul(p, vh);
    auto merged = ad::reshape(ad::permute(ctx, std::span<const std::size_t>(kSplitHeads)), {nq, width});
    return o.forward(store, merged);
}

#define C2FT_INSTANTIATE_LAYERS(T)                                                                               \
    template Linear Linear::create(ParameterStore<T>&, const std::string&, std::size_t, std::size_t, Rng&);        \
    template ad::Tensor<T> Linear::forward(const ParameterStore<T>&, const ad::Tensor<T>&) const;                 \
    template LayerNorm LayerNorm::create(ParameterStore<T>&, const std::string&, std::size_t, double);            \
    template ad::Tensor<T> LayerNorm::forward(const ParameterStore<T>&, const ad::Tensor<T>&) const;              \
    template Mlp Mlp::create(ParameterStore<T>&, const std::string&, std::size_t, std::size_t, std::size_t, Rng&); \
    template ad::Tensor<T> Mlp::forward(const ParameterStore<T>&, const ad::Tensor<T>&) const;                    \
    template Attention Attention::create(ParameterStore<T>&, const std::string&, std::size_t, std::size_t, Rng&);  \
    template ad::Tensor<T> Attention::forward(const ParameterStore<T>&, const ad::Tensor<T>&, const ad::Tensor<T>&, \
                                              ad::Tensor<T>*) const;

C2FT_INSTANTIATE_LAYERS(float)
C2FT_INSTANTIATE_LAYERS(double)

}  // namespace c2ft::model
