#pragma once

#include <cstddef>
#include <vector>

#include "c2ft/autodiff/tensor.hpp"
#include "c2ft/voxel/grid.hpp"

namespace c2ft::vox {

// A grid cut into (side/cube)^3 cubes of cube^3 voxels. Token t enumerates
// cubes row-major over cube indices (i, j, k), k fastest; inside a token the
// voxels are row-major (z fastest), matching VoxelGrid.
struct CubeTokenization {
    std::size_t cube_side = 0;
    std::size_t cubes_per_axis = 0;
    GridKind kind = GridKind::Continuous;
    std::vector<std::vector<double>> tokens;

    std::size_t token_count() const { return tokens.size(); }
    std::size_t token_size() const { return cube_side * cube_side * cube_side; }
};

// NonDivisibleCube unless cube_side divides grid.side().
CubeTokenization partition_cubes(const VoxelGrid& grid, std::size_t cube_side);
// Exact inverse of partition_cubes. ShapeMismatch on inconsistent tokens.
VoxelGrid assemble_cubes(const CubeTokenization& tokens);

// Differentiable counterparts on a [side, side, side] (or flat side^3) tensor,
// with the same token ordering. partition returns [g, cube^3].
template <std::floating_point T>
ad::Tensor<T> partition_cubes(const ad::Tensor<T>& volume, std::size_t side, std::size_t cube_side);
// tokens [g, cube^3] -> [side, side, side].
template <std::floating_point T>
ad::Tensor<T> assemble_cubes(const ad::Tensor<T>& tokens, std::size_t side, std::size_t cube_side);

}  // namespace c2ft::vox
