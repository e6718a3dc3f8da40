#include "c2ft/voxel/cubes.hpp"

#include <array>

#include "c2ft/autodiff/ops.hpp"
#include "c2ft/error.hpp"

namespace c2ft::vox {

namespace {

std::size_t cubes_along(std::size_t side, std::size_t cube_side) {
    if (cube_side == 0 || side == 0 || side % cube_side != 0) {
        fail(ErrorCode::NonDivisibleCube,
             "cube side " + std::to_string(cube_side) + " does not divide grid side " + std::to_string(side));
    }
    return side / cube_side;
}

}  // namespace

CubeTokenization partition_cubes(const VoxelGrid& grid, std::size_t cube_side) {
    const std::size_t n = cubes_along(grid.side(), cube_side);
    CubeTokenization out;
    out.cube_side = cube_side;
    out.cubes_per_axis = n;
    out.kind = grid.kind();
    out.tokens.reserve(n * n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k) {
                std::vector<double> token;
                token.reserve(out.token_size());
                for (std::size_t x = 0; x < cube_side; ++x)
                    for (std::size_t y = 0; y < cube_side; ++y)
                        for (std::size_t z = 0; z < cube_side; ++z)
                            token.push_back(grid.at(i * cube_side + x, j * cube_side + y, k * cube_side + z));
                out.tokens.push_back(std::move(token));
            }
    return out;
}

VoxelGrid assemble_cubes(const CubeTokenization& tok) {
    const std::size_t n = tok.cubes_per_axis;
    const std::size_t c = tok.cube_side;
    if (n == 0 || c == 0 || tok.tokens.size() != n * n * n)
        fail(ErrorCode::ShapeMismatch, "token count does not form a cube grid");
    for (const auto& t : tok.tokens) {
        if (t.size() != tok.token_size()) fail(ErrorCode::ShapeMismatch, "token size differs from cube_side^3");
    }
    const std::size_t side = n * c;
    std::vector<double> values(side * side * side);
    std::size_t t = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k, ++t) {
                std::size_t v = 0;
                for (std::size_t x = 0; x < c; ++x)
                    for (std::size_t y = 0; y < c; ++y)
                        for (std::size_t z = 0; z < c; ++z, ++v)
                            values[((i * c + x) * side + (j * c + y)) * side + (k * c + z)] = tok.tokens[t][v];
            }
    return VoxelGrid(side, std::move(values), tok.kind);
}

template <std::floating_point T>
ad::Tensor<T> partition_cubes(const ad::Tensor<T>& volume, std::size_t side, std::size_t cube_side) {
    const std::size_t n = cubes_along(side, cube_side);
    if (volume.numel() != side * side * side) fail(ErrorCode::ShapeMismatch, "volume is not side^3");
    const std::size_t c = cube_side;
    static constexpr std::array<std::size_t, 6> order{0, 2, 4, 1, 3, 5};
    auto split = ad::reshape(volume, {n, c, n, c, n, c});
    return ad::reshape(ad::permute(split, std::span<const std::size_t>(order)), {n * n * n, c * c * c});
}

template <std::floating_point T>
ad::Tensor<T> assemble_cubes(const ad::Tensor<T>& tokens, std::size_t side, std::size_t cube_side) {
    const std::size_t n = cubes_along(side, cube_side);
    const std::size_t c = cube_side;
    if (tokens.rank() != 2 || tokens.dim(0) != n * n * n || tokens.dim(1) != c * c * c)
        fail(ErrorCode::ShapeMismatch, "tokens " + ad::shape_str(tokens.shape()) + " do not assemble");
    static constexpr std::array<std::size_t, 6> order{0, 3, 1, 4, 2, 5};
    auto grid = ad::reshape(tokens, {n, n, n, c, c, c});
    return ad::reshape(ad::permute(grid, std::span<const std::size_t>(order)), {side, side, side});
}

template ad::Tensor<float> partition_cubes(const ad::Tensor<float>&, std::size_t, std::size_t);
template ad::Tensor<double> partition_cubes(const ad::Tensor<double>&, std::size_t, std::size_t);
template ad::Tensor<float> assemble_cubes(const ad::Tensor<float>&, std::size_t, std::size_t);
template ad::Tensor<double> assemble_cubes(const ad::Tensor<double>&, std::size_t, std::size_t);

}  // namespace c2ft::vox
