#include "c2ft/model/params.hpp"

#include <cmath>

#include "c2ft/error.hpp"

namespace c2ft::model {

template <std::floating_point T>
ParamIndex ParameterStore<T>::add(std::string name, ad::Tensor<T> value) {
    if (index_.contains(name)) fail(ErrorCode::InvalidArgument, "duplicate parameter name '" + name + "'");
    value.set_requires_grad(true);
    const ParamIndex i = tensors_.size();
    index_.emplace(name, i);
    names_.push_back(std::move(name));
    tensors_.push_back(std::move(value));
    return i;
}

template <std::floating_point T>
std::optional<ParamIndex> ParameterStore<T>::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

template <std::floating_point T>
std::size_t ParameterStore<T>::numel() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t.numel();
    return n;
}

template <std::floating_point T>
void ParameterStore<T>::zero_grad() {
    for (auto& t : tensors_) t.zero_grad();
}

template <std::floating_point T>
ad::Tensor<T> init_xavier(ad::Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::vector<T> v(ad::shape_numel(shape));
    std::uniform_real_distribution<double> dist(-a, a);
    for (auto& x : v) x = static_cast<T>(dist(rng));
    return ad::Tensor<T>::from(std::move(shape), std::move(v));
}

template <std::floating_point T>
ad::Tensor<T> init_normal(ad::Shape shape, double stddev, Rng& rng) {
    std::vector<T> v(ad::shape_numel(shape));
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& x : v) x = static_cast<T>(dist(rng));
    return ad::Tensor<T>::from(std::move(shape), std::move(v));
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template ad::Tensor<float> init_xavier<float>(ad::Shape, std::size_t, std::size_t, Rng&);
template ad::Tensor<double> init_xavier<double>(ad::Shape, std::size_t, std::size_t, Rng&);
template ad::Tensor<float> init_normal<float>(ad::Shape, double, Rng&);
template ad::Tensor<double> init_normal<double>(ad::Shape, double, Rng&);

}  // namespace c2ft::model
