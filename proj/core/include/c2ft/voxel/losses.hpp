#pragma once

#include "c2ft/autodiff/tensor.hpp"
#include "c2ft/voxel/grid.hpp"

namespace c2ft::vox {

struct SsimConstants {
    double c1 = 0.01;
    double c2 = 0.03;
};

// Mean squared error over exactly side^3 voxels.
template <std::floating_point T>
ad::Tensor<T> loss_mse(const ad::Tensor<T>& target, const ad::Tensor<T>& prediction);

// 1 - SSIM with a single whole-volume window:
//   SSIM = (2 mu_y mu_p + c1)(2 cov_yp + c2) / ((mu_y^2 + mu_p^2 + c1)(var_y + var_p + c2))
// using population (1/M^3) moments. Result lies in [0, 2].
template <std::floating_point T>
ad::Tensor<T> loss_ssim3d(const ad::Tensor<T>& target, const ad::Tensor<T>& prediction, SsimConstants k = {});

// loss_mse + loss_ssim3d.
template <std::floating_point T>
ad::Tensor<T> loss_total(const ad::Tensor<T>& target, const ad::Tensor<T>& prediction, SsimConstants k = {});

double loss_mse(const VoxelGrid& target, const VoxelGrid& prediction);
double loss_ssim3d(const VoxelGrid& target, const VoxelGrid& prediction, SsimConstants k = {});
double loss_total(const VoxelGrid& target, const VoxelGrid& prediction, SsimConstants k = {});

}  // namespace c2ft::vox
