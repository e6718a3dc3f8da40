#pragma once

#include <span>
#include <vector>

#include "c2ft/autodiff/tensor.hpp"

namespace c2ft::ad {

// p <- p - lr * g for every (param, grad) pair. ShapeMismatch when a grad
// does not hold exactly one value per parameter entry.
template <std::floating_point T>
void sgd_step(std::span<Tensor<T>> params, std::span<const std::vector<T>> grads, T lr);

// Same update using each parameter's accumulated grad; parameters without a
// grad are left untouched.
template <std::floating_point T>
void sgd_step(std::span<Tensor<T>> params, T lr);

}  // namespace c2ft::ad
