#pragma once

#include <cstddef>
#include <vector>

namespace c2ft::vox {

enum class GridKind { Continuous, Binary };

// Cubic occupancy field. Values are row-major with z fastest:
// index(x, y, z) = (x * side + y) * side + z. The y axis points up.
class VoxelGrid {
   public:
    VoxelGrid() = default;
    // Validates the kind invariant: Continuous in [0,1], Binary in {0,1}.
    VoxelGrid(std::size_t side, std::vector<double> values, GridKind kind);

    static VoxelGrid zeros(std::size_t side, GridKind kind = GridKind::Binary);
    static VoxelGrid filled(std::size_t side, double value, GridKind kind = GridKind::Continuous);

    std::size_t side() const { return side_; }
    std::size_t size() const { return values_.size(); }
    GridKind kind() const { return kind_; }
    const std::vector<double>& values() const { return values_; }

    std::size_t index(std::size_t x, std::size_t y, std::size_t z) const { return (x * side_ + y) * side_ + z; }
    double at(std::size_t x, std::size_t y, std::size_t z) const { return values_[index(x, y, z)]; }
    // Setter keeps the kind invariant.
    void set(std::size_t x, std::size_t y, std::size_t z, double value);

    // Binary grid with value >= threshold mapped to 1.
    VoxelGrid binarize(double threshold) const;
    std::size_t occupied() const;

    friend bool operator==(const VoxelGrid&, const VoxelGrid&) = default;

   private:
    std::size_t side_ = 0;
    std::vector<double> values_;
    GridKind kind_ = GridKind::Binary;
};

}  // namespace c2ft::vox
