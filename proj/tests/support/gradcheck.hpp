#pragma once

// Central finite-difference oracle. Lives in test code only and never calls
// into backward(); the analytic side is compared against it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "c2ft/autodiff/ops.hpp"
#include "c2ft/autodiff/tensor.hpp"

namespace c2ft::testing {

using ad::Tensor;

// Entries whose magnitude is below this are compared on this scale instead of
// their own, so that gradients that are zero up to roundoff do not turn
// 1e-12 absolute noise into a large ratio.
inline constexpr double kRelFloor = 1e-6;

inline double rel_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kRelFloor});
}

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::size_t checked = 0;
};

// `loss` rebuilds the graph from the current leaf values and returns a scalar.
// At most `max_entries` coordinates per leaf are probed (chosen with `seed`).
inline GradCheckResult grad_check(const std::function<Tensor<double>()>& loss, std::vector<Tensor<double>> leaves,
                                  double h = 1e-5, std::size_t max_entries = 0, unsigned seed = 7) {
    for (auto& leaf : leaves) leaf.zero_grad();
    loss().backward();
    std::vector<std::vector<double>> analytic;
    for (auto& leaf : leaves) {
        if (leaf.has_grad())
            analytic.emplace_back(leaf.grad().begin(), leaf.grad().end());
        else
            analytic.emplace_back(leaf.numel(), 0.0);
    }

    std::mt19937 rng(seed);
    GradCheckResult result;
    for (std::size_t li = 0; li < leaves.size(); ++li) {
        auto values = leaves[li].mutable_data();
        std::vector<std::size_t> idx(values.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        if (max_entries && idx.size() > max_entries) {
            std::shuffle(idx.begin(), idx.end(), rng);
            idx.resize(max_entries);
        }
        for (const auto i : idx) {
            const double saved = values[i];
            values[i] = saved + h;
            const double up = loss().item();
            values[i] = saved - h;
            const double down = loss().item();
            values[i] = saved;
            const double numeric = (up - down) / (2 * h);
            result.max_rel_error = std::max(result.max_rel_error, rel_error(analytic[li][i], numeric));
            ++result.checked;
        }
    }
    return result;
}

inline Tensor<double> random_tensor(ad::Shape shape, std::mt19937& rng, double lo = -1.0, double hi = 1.0,
                                    bool requires_grad = true) {
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> v(ad::shape_numel(shape));
    for (auto& x : v) x = dist(rng);
    return Tensor<double>::from(std::move(shape), std::move(v), requires_grad);
}

// Projects an op output onto fixed random weights so every output entry
// contributes a distinct coefficient to the checked scalar.
inline Tensor<double> project(const Tensor<double>& out, unsigned seed) {
    std::mt19937 rng(seed + 1000);
    auto w = random_tensor(out.shape(), rng, -1.0, 1.0, false);
    return ad::sum(ad::mul(out, w));
}

}  // namespace c2ft::testing
