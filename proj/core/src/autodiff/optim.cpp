#include "c2ft/autodiff/optim.hpp"

#include "c2ft/error.hpp"

namespace c2ft::ad {

template <std::floating_point T>
void sgd_step(std::span<Tensor<T>> params, std::span<const std::vector<T>> grads, T lr) {
    if (params.size() != grads.size()) fail(ErrorCode::ShapeMismatch, "sgd_step: param/grad count differs");
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (grads[i].size() != params[i].numel())
            fail(ErrorCode::ShapeMismatch, "sgd_step: grad size for param " + std::to_string(i));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto p = params[i].mutable_data();
        for (std::size_t j = 0; j < p.size(); ++j) p[j] = p[j] - lr * grads[i][j];
    }
}

template <std::floating_point T>
void sgd_step(std::span<Tensor<T>> params, T lr) {
    for (auto& param : params) {
        if (!param.has_grad()) continue;
        auto p = param.mutable_data();
        const auto g = param.grad();
        for (std::size_t j = 0; j < p.size(); ++j) p[j] = p[j] - lr * g[j];
    }
}

template void sgd_step(std::span<Tensor<float>>, std::span<const std::vector<float>>, float);
template void sgd_step(std::span<Tensor<double>>, std::span<const std::vector<double>>, double);
template void sgd_step(std::span<Tensor<float>>, float);
template void sgd_step(std::span<Tensor<double>>, double);

}  // namespace c2ft::ad
