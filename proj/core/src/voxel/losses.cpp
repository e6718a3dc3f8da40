#include "c2ft/voxel/losses.hpp"

#include "c2ft/autodiff/ops.hpp"
#include "c2ft/error.hpp"

namespace c2ft::vox {

namespace {

template <std::floating_point T>
void check_pair(const ad::Tensor<T>& a, const ad::Tensor<T>& b) {
    if (a.numel() != b.numel())
        fail(ErrorCode::ShapeMismatch, "loss operands " + ad::shape_str(a.shape()) + " vs " + ad::shape_str(b.shape()));
}

void check_pair(const VoxelGrid& a, const VoxelGrid& b) {
    if (a.side() != b.side()) fail(ErrorCode::ShapeMismatch, "loss operands have different sides");
}

template <std::floating_point T>
ad::Tensor<T> flat(const VoxelGrid& g) {
    std::vector<T> v(g.values().begin(), g.values().end());
    return ad::Tensor<T>::from({g.size()}, std::move(v));
}

}  // namespace

template <std::floating_point T>
ad::Tensor<T> loss_mse(const ad::Tensor<T>& target, const ad::Tensor<T>& prediction) {
    check_pair(target, prediction);
    auto diff = ad::sub(ad::reshape(prediction, {prediction.numel()}), ad::reshape(target, {target.numel()}));
    return ad::mean(ad::mul(diff, diff));
}

template <std::floating_point T>
ad::Tensor<T> loss_ssim3d(const ad::Tensor<T>& target, const ad::Tensor<T>& prediction, SsimConstants k) {
    check_pair(target, prediction);
    const auto y = ad::reshape(target, {target.numel()});
    const auto p = ad::reshape(prediction, {prediction.numel()});
    const auto mu_y = ad::mean(y);
    const auto mu_p = ad::mean(p);
    const auto dy = ad::sub(y, mu_y);
    const auto dp = ad::sub(p, mu_p);
    const auto var_y = ad::mean(ad::mul(dy, dy));
    const auto var_p = ad::mean(ad::mul(dp, dp));
    const auto cov = ad::mean(ad::mul(dy, dp));

    const T c1 = static_cast<T>(k.c1);
    const T c2 = static_cast<T>(k.c2);
    const auto luminance_num = ad::add_scalar(ad::scale(ad::mul(mu_y, mu_p), T(2)), c1);
    const auto structure_num = ad::add_scalar(ad::scale(cov, T(2)), c2);
    const auto luminance_den = ad::add_scalar(ad::add(ad::mul(mu_y, mu_y), ad::mul(mu_p, mu_p)), c1);
    const auto structure_den = ad::add_scalar(ad::add(var_y, var_p), c2);
    const auto ssim = ad::div(ad::mul(luminance_num, structure_num), ad::mul(luminance_den, structure_den));
    return ad::add_scalar(ad::scale(ssim, T(-1)), T(1));
}

template <std::floating_point T>
ad::Tensor<T> loss_total(const ad::Tensor<T>& target, const ad::Tensor<T>& prediction, SsimConstants k) {
    return ad::add(loss_mse(target, prediction), loss_ssim3d(target, prediction, k));
}

double loss_mse(const VoxelGrid& target, const VoxelGrid& prediction) {
    check_pair(target, prediction);
    return loss_mse(flat<double>(target), flat<double>(prediction)).item();
}

double loss_ssim3d(const VoxelGrid& target, const VoxelGrid& prediction, SsimConstants k) {
    check_pair(target, prediction);
    return loss_ssim3d(flat<double>(target), flat<double>(prediction), k).item();
}

double loss_total(const VoxelGrid& target, const VoxelGrid& prediction, SsimConstants k) {
    check_pair(target, prediction);
    return loss_total(flat<double>(target), flat<double>(prediction), k).item();
}

template ad::Tensor<float> loss_mse(const ad::Tensor<float>&, const ad::Tensor<float>&);
template ad::Tensor<double> loss_mse(const ad::Tensor<double>&, const ad::Tensor<double>&);
template ad::Tensor<float> loss_ssim3d(const ad::Tensor<float>&, const ad::Tensor<float>&, SsimConstants);
template ad::Tensor<double> loss_ssim3d(const ad::Tensor<double>&, const ad::Tensor<double>&, SsimConstants);
template ad::Tensor<float> loss_total(const ad::Tensor<float>&, const ad::Tensor<float>&, SsimConstants);
template ad::Tensor<double> loss_total(const ad::Tensor<double>&, const ad::Tensor<double>&, SsimConstants);

}  // namespace c2ft::vox
