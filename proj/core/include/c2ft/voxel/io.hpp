#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "c2ft/voxel/grid.hpp"

namespace c2ft::vox {

using Bytes = std::vector<std::uint8_t>;

struct BinvoxMeta {
    std::array<double, 3> translate{0.0, 0.0, 0.0};
    double scale = 1.0;
};

// binvox: ASCII header (#binvox 1 / dim / translate / scale / data) followed
// by (value, count) run-length byte pairs. Voxels are stored x-major, then z,
// with y running fastest. Only cubic grids are accepted (DimMismatch
// otherwise); MalformedHeader and TruncatedRLE report damaged files.
VoxelGrid read_binvox(std::span<const std::uint8_t> bytes, BinvoxMeta* meta = nullptr);
// Requires a Binary grid.
Bytes write_binvox(const VoxelGrid& grid, const BinvoxMeta& meta = {});

enum class RawDtype { F32, F64 };

// VOXRAW: one header line "VOXRAW <side> <f32|f64>\n" then side^3 little-endian
// values, row-major. Reads back a Continuous grid.
Bytes write_voxraw(const VoxelGrid& grid, RawDtype dtype = RawDtype::F64);
VoxelGrid read_voxraw(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace c2ft::vox
