#include "c2ft/voxel/grid.hpp"

#include <algorithm>
#include <cmath>

#include "c2ft/error.hpp"

namespace c2ft::vox {

namespace {

void check_value(double v, GridKind kind) {
    if (kind == GridKind::Binary) {
        if (v != 0.0 && v != 1.0) fail(ErrorCode::InvalidArgument, "binary grid value must be 0 or 1");
    } else if (!(v >= 0.0 && v <= 1.0)) {
        fail(ErrorCode::InvalidArgument, "continuous grid value outside [0,1]");
    }
}

}  // namespace

VoxelGrid::VoxelGrid(std::size_t side, std::vector<double> values, GridKind kind)
    : side_(side), values_(std::move(values)), kind_(kind) {
    if (side == 0) fail(ErrorCode::InvalidArgument, "voxel grid side must be positive");
    if (values_.size() != side * side * side)
        fail(ErrorCode::ShapeMismatch, "voxel grid of side " + std::to_string(side) + " needs side^3 values");
    for (const double v : values_) check_value(v, kind_);
}

VoxelGrid VoxelGrid::zeros(std::size_t side, GridKind kind) {
    return VoxelGrid(side, std::vector<double>(side * side * side, 0.0), kind);
}

VoxelGrid VoxelGrid::filled(std::size_t side, double value, GridKind kind) {
    return VoxelGrid(side, std::vector<double>(side * side * side, value), kind);
}

void VoxelGrid::set(std::size_t x, std::size_t y, std::size_t z, double value) {
    check_value(value, kind_);
    values_[index(x, y, z)] = value;
}

VoxelGrid VoxelGrid::binarize(double threshold) const {
    std::vector<double> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(),
                   [threshold](double v) { return v >= threshold ? 1.0 : 0.0; });
    return VoxelGrid(side_, std::move(out), GridKind::Binary);
}

std::size_t VoxelGrid::occupied() const {
    return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return v >= 0.5; }));
}

}  // namespace c2ft::vox
