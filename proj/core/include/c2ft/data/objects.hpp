#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string_view>

#include "c2ft/voxel/grid.hpp"

namespace c2ft::data {

// Procedural shape families. Every family keeps a one-voxel empty margin.
//   Box        one axis-aligned box
//   LShape     horizontal slab plus a vertical slab on one end
//   Table      top slab on four corner legs
//   Chair      seat on four legs plus a backrest
//   Lamp       round base, thin pole, cone-like shade
//   Cylinder   upright solid cylinder
//   Torus      horizontal ring
//   Composite  stacked boxes of shrinking footprint topped by a ball
enum class Category : std::uint8_t { Box, LShape, Table, Chair, Lamp, Cylinder, Torus, Composite };

inline constexpr std::size_t kCategoryCount = 8;
inline constexpr std::array<Category, kCategoryCount> kAllCategories{
    Category::Box,   Category::LShape,   Category::Table, Category::Chair,
    Category::Lamp,  Category::Cylinder, Category::Torus, Category::Composite};

std::string_view category_name(Category c);
std::optional<Category> parse_category(std::string_view name);

struct SyntheticObject {
    Category category = Category::Box;
    std::uint64_t seed = 0;
    vox::VoxelGrid grid;
};

// Engine used by gen_object for (category, seed).
std::mt19937_64 object_rng(Category category, std::uint64_t seed);

// Deterministic in (category, seed, side). InvalidArgument when side < 8.
//
// Box draws, in order and with std::uniform_int_distribution on
// object_rng(): extents ex, ey, ez each in [max(2, side/4), side - 2], then
// origins ox, oy, oz each in [1, side - 1 - extent].
SyntheticObject gen_object(Category category, std::uint64_t seed, std::size_t side);

}  // namespace c2ft::data
