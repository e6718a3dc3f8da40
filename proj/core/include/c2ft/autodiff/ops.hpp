#pragma once

#include <span>
#include <vector>

#include "c2ft/autodiff/tensor.hpp"

// Differentiable primitives. Every op validates shapes (ShapeMismatch),
// rejects non-finite results produced from finite inputs (NonFinite), and
// records a backward closure when any input requires a gradient.
//
// Broadcasting is limited to leading dimensions: in a binary op the smaller
// operand's shape must equal the trailing dims of the larger one (a rank-0
// tensor is a suffix of everything).
namespace c2ft::ad {

// a[..., m, k] @ b[..., k, n]. Batch dims must match, or one side must be 2-D.
template <std::floating_point T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

template <std::floating_point T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <std::floating_point T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <std::floating_point T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
// DivideByZero when any denominator entry is exactly zero.
template <std::floating_point T>
Tensor<T> div(const Tensor<T>& a, const Tensor<T>& b);

template <std::floating_point T>
Tensor<T> add_scalar(const Tensor<T>& x, T value);
template <std::floating_point T>
Tensor<T> scale(const Tensor<T>& x, T factor);

// Exact (erf-based) GELU.
template <std::floating_point T>
Tensor<T> gelu(const Tensor<T>& x);
template <std::floating_point T>
Tensor<T> sigmoid(const Tensor<T>& x);

// Max-subtracted softmax along `axis`.
template <std::floating_point T>
Tensor<T> softmax(const Tensor<T>& x, int axis);

// Normalises over the last axis, then applies gain and bias of that extent.
template <std::floating_point T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gain, const Tensor<T>& bias, T eps);

template <std::floating_point T>
Tensor<T> concat(std::span<const Tensor<T>> parts, int axis);
template <std::floating_point T>
std::vector<Tensor<T>> split(const Tensor<T>& x, std::span<const std::size_t> sizes, int axis);
template <std::floating_point T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::size_t start, std::size_t length);

template <std::floating_point T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape);
template <std::floating_point T>
Tensor<T> permute(const Tensor<T>& x, std::span<const std::size_t> order);
template <std::floating_point T>
Tensor<T> transpose(const Tensor<T>& x, int axis0, int axis1);

// Full reductions return a rank-0 tensor.
template <std::floating_point T>
Tensor<T> sum(const Tensor<T>& x);
template <std::floating_point T>
Tensor<T> mean(const Tensor<T>& x);
// Reduction over one axis; the axis is removed from the result.
template <std::floating_point T>
Tensor<T> sum_axis(const Tensor<T>& x, int axis);
template <std::floating_point T>
Tensor<T> mean_axis(const Tensor<T>& x, int axis);

// x[N, C, H, W], weight[O, C, kh, kw], bias[O] -> [N, O, Ho, Wo].
template <std::floating_point T>
Tensor<T> conv2d(const Tensor<T>& x, const Tensor<T>& weight, const Tensor<T>& bias, std::size_t stride,
                 std::size_t padding);

template <std::floating_point T>
Tensor<T> operator+(const Tensor<T>& a, const Tensor<T>& b) {
    return add(a, b);
}
template <std::floating_point T>
Tensor<T> operator-(const Tensor<T>& a, const Tensor<T>& b) {
    return sub(a, b);
}
template <std::floating_point T>
Tensor<T> operator*(const Tensor<T>& a, const Tensor<T>& b) {
    return mul(a, b);
}
template <std::floating_point T>
Tensor<T> operator/(const Tensor<T>& a, const Tensor<T>& b) {
    return div(a, b);
}

}  // namespace c2ft::ad
