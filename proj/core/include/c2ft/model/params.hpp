#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "c2ft/autodiff/tensor.hpp"

namespace c2ft::model {

using ParamIndex = std::size_t;
using Rng = std::mt19937_64;

// Owns every trainable leaf tensor under a unique dotted name. Modules keep
// indices into the store and read the tensors at forward time.
template <std::floating_point T>
class ParameterStore {
   public:
    // InvalidArgument on a duplicate name. The tensor is marked trainable.
    ParamIndex add(std::string name, ad::Tensor<T> value);

    const ad::Tensor<T>& operator[](ParamIndex i) const { return tensors_.at(i); }
    ad::Tensor<T>& operator[](ParamIndex i) { return tensors_.at(i); }
    std::size_t size() const { return tensors_.size(); }
    const std::string& name(ParamIndex i) const { return names_.at(i); }
    std::optional<ParamIndex> find(std::string_view name) const;

    std::vector<ad::Tensor<T>>& tensors() { return tensors_; }
    const std::vector<ad::Tensor<T>>& tensors() const { return tensors_; }

    std::size_t numel() const;
    void zero_grad();

   private:
    std::vector<std::string> names_;
    std::vector<ad::Tensor<T>> tensors_;
    std::unordered_map<std::string, ParamIndex> index_;
};

// Initialisers. All draw from the supplied engine in a fixed order.
template <std::floating_point T>
ad::Tensor<T> init_xavier(ad::Shape shape, std::size_t fan_in, std::size_t fan_out, Rng& rng);
template <std::floating_point T>
ad::Tensor<T> init_normal(ad::Shape shape, double stddev, Rng& rng);

}  // namespace c2ft::model
