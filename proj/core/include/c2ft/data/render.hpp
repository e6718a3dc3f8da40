#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "c2ft/voxel/grid.hpp"
#include "c2ft/voxel/io.hpp"

namespace c2ft::data {

// Channel-major image [channels, size, size], row 0 at the top. Values lie in
// [0, 1]. Channel 0 is the silhouette, channel 1 the nearest-surface depth
// (1 = closest); background is 0 in every channel.
struct ViewImage {
    std::size_t size = 0;
    std::size_t channels = 2;
    std::vector<float> values;

    static ViewImage blank(std::size_t size, std::size_t channels = 2);
    float at(std::size_t c, std::size_t row, std::size_t col) const { return values[(c * size + row) * size + col]; }
    float& at(std::size_t c, std::size_t row, std::size_t col) { return values[(c * size + row) * size + col]; }
    // InvalidArgument unless extents are positive and values lie in [0, 1].
    void validate() const;

    friend bool operator==(const ViewImage&, const ViewImage&) = default;
};

inline constexpr std::size_t kPoseCount = 24;
inline constexpr double kDefaultElevation = 30.0;

struct CameraPose {
    std::size_t azimuth_index = 0;  // 15 degree steps
    double elevation_deg = kDefaultElevation;
    double scale = 1.0;  // orthographic zoom; 1 fits the unit cube in every pose

    double azimuth_deg() const { return 15.0 * static_cast<double>(azimuth_index); }
};

std::vector<CameraPose> standard_poses(double elevation_deg = kDefaultElevation);

// Orthographic projection of the grid (unit cube centred at the origin,
// azimuth about the up axis, then elevation). Each voxel fills the pixels
// whose centres fall inside its projected bounding rectangle, plus the pixel
// holding its projected centre. Values are quantised to 16 bits.
ViewImage render_view(const vox::VoxelGrid& grid, const CameraPose& pose, std::size_t out_size);
std::vector<ViewImage> render_views(const vox::VoxelGrid& grid, std::span<const CameraPose> poses,
                                    std::size_t out_size);

// Binary 16-bit PGM (P5, maxval 65535) of one channel.
vox::Bytes write_pgm(const ViewImage& image, std::size_t channel);
// Returns the plane as floats q / 65535. MalformedHeader, SizeMismatch.
std::vector<float> read_pgm(std::span<const std::uint8_t> bytes, std::size_t& size);

}  // namespace c2ft::data
