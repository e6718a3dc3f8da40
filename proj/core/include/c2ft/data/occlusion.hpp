#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "c2ft/data/render.hpp"

namespace c2ft::data {

enum class OcclusionMode { Center, Random };

// Box sides at the 224-pixel reference resolution.
inline constexpr std::array<std::size_t, 7> kOcclusionSizes{10, 15, 20, 25, 30, 35, 40};
inline constexpr std::size_t kReferenceImageSize = 224;

// round(box * image_size / 224).
std::size_t scale_box(std::size_t box_at_224, std::size_t image_size);

// Blanks a box x box square in views 1, 3, 5, ... (1-based positions in the
// list); the others are returned unchanged. Center mode centres the box on
// the silhouette bounding box (image centre when the view is empty); Random
// mode draws the centre uniformly inside that bounding box from `seed`. The
// square is shifted, not clipped, to stay inside the image, so exactly box^2
// pixels are overwritten. box == 0 is the identity. BoxLargerThanImage when
// box exceeds the image side.
std::vector<ViewImage> occlude(const std::vector<ViewImage>& views, std::size_t box,
                               OcclusionMode mode = OcclusionMode::Center, std::uint64_t seed = 0);

}  // namespace c2ft::data
