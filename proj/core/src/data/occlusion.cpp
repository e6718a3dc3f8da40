#include "c2ft/data/occlusion.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "c2ft/error.hpp"

namespace c2ft::data {

std::size_t scale_box(std::size_t box_at_224, std::size_t image_size) {
    return static_cast<std::size_t>(std::lround(static_cast<double>(box_at_224) * static_cast<double>(image_size) /
                                                static_cast<double>(kReferenceImageSize)));
}

std::vector<ViewImage> occlude(const std::vector<ViewImage>& views, std::size_t box, OcclusionMode mode,
                               std::uint64_t seed) {
    std::vector<ViewImage> out = views;
    if (box == 0) return out;
    for (std::size_t i = 0; i < out.size(); i += 2) {
        ViewImage& img = out[i];
        const std::size_t s = img.size;
        if (box > s)
            fail(ErrorCode::BoxLargerThanImage,
                 "occlusion box " + std::to_string(box) + " exceeds image side " + std::to_string(s));

        std::size_t rmin = s, rmax = 0, cmin = s, cmax = 0;
        for (std::size_t r = 0; r < s; ++r)
            for (std::size_t c = 0; c < s; ++c)
                if (img.at(0, r, c) > 0.0f) {
                    rmin = std::min(rmin, r);
                    rmax = std::max(rmax, r);
                    cmin = std::min(cmin, c);
                    cmax = std::max(cmax, c);
                }
        if (rmin > rmax) rmin = rmax = cmin = cmax = s / 2;

        std::size_t cr = (rmin + rmax + 1) / 2;
        std::size_t cc = (cmin + cmax + 1) / 2;
        if (mode == OcclusionMode::Random) {
            std::mt19937_64 rng(seed ^ (0x5851F42D4C957F2Dull * (i + 1)));
            cr = std::uniform_int_distribution<std::size_t>(rmin, rmax)(rng);
            cc = std::uniform_int_distribution<std::size_t>(cmin, cmax)(rng);
        }
        const std::size_t r0 = std::min(cr > box / 2 ? cr - box / 2 : 0, s - box);
        const std::size_t c0 = std::min(cc > box / 2 ? cc - box / 2 : 0, s - box);
        for (std::size_t ch = 0; ch < img.channels; ++ch)
            for (std::size_t r = r0; r < r0 + box; ++r)
                for (std::size_t c = c0; c < c0 + box; ++c) img.at(ch, r, c) = 0.0f;
    }
    return out;
}

}  // namespace c2ft::data
