#include "c2ft/data/objects.hpp"

#include <algorithm>
#include <cmath>

#include "c2ft/error.hpp"

namespace c2ft::data {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kNames{"box",  "l_shape",  "table", "chair",
                                                              "lamp", "cylinder", "torus", "composite"};

// Writes into the interior [1, side-2]^3 only, so the margin holds by
// construction. Round shapes test voxel centres (i + 0.5).
class Painter {
   public:
    explicit Painter(std::size_t side) : side_(static_cast<int>(side)), v_(side * side * side, 0.0) {}

    // Half-open index ranges.
    void box(int x0, int x1, int y0, int y1, int z0, int z1) {
        for (int x = std::max(x0, 1); x < std::min(x1, side_ - 1); ++x)
            for (int y = std::max(y0, 1); y < std::min(y1, side_ - 1); ++y)
                for (int z = std::max(z0, 1); z < std::min(z1, side_ - 1); ++z) put(x, y, z);
    }

    // Upright disc stack: centre (cx, cz), rows [y0, y1).
    void cylinder(double cx, double cz, double radius, int y0, int y1) {
        for (int y = std::max(y0, 1); y < std::min(y1, side_ - 1); ++y) disc(cx, y, cz, radius);
    }

    void disc(double cx, int y, double cz, double radius) {
        if (y < 1 || y >= side_ - 1) return;
        for (int x = 1; x < side_ - 1; ++x)
            for (int z = 1; z < side_ - 1; ++z) {
                const double dx = x + 0.5 - cx;
                const double dz = z + 0.5 - cz;
                if (dx * dx + dz * dz <= radius * radius) put(x, y, z);
            }
    }

    void ball(double cx, double cy, double cz, double radius) {
        for (int x = 1; x < side_ - 1; ++x)
            for (int y = 1; y < side_ - 1; ++y)
                for (int z = 1; z < side_ - 1; ++z) {
                    const double dx = x + 0.5 - cx, dy = y + 0.5 - cy, dz = z + 0.5 - cz;
                    if (dx * dx + dy * dy + dz * dz <= radius * radius) put(x, y, z);
                }
    }

    // Ring in the horizontal plane through cy.
    void torus(double cx, double cy, double cz, double major, double minor) {
        for (int x = 1; x < side_ - 1; ++x)
            for (int y = 1; y < side_ - 1; ++y)
                for (int z = 1; z < side_ - 1; ++z) {
                    const double dx = x + 0.5 - cx, dy = y + 0.5 - cy, dz = z + 0.5 - cz;
                    const double ring = std::sqrt(dx * dx + dz * dz) - major;
                    if (ring * ring + dy * dy <= minor * minor) put(x, y, z);
                }
    }

    vox::VoxelGrid finish() && {
        return vox::VoxelGrid(static_cast<std::size_t>(side_), std::move(v_), vox::GridKind::Binary);
    }

   private:
    void put(int x, int y, int z) { v_[static_cast<std::size_t>((x * side_ + y) * side_ + z)] = 1.0; }

    int side_;
    std::vector<double> v_;
};

struct Draw {
    std::mt19937_64& rng;
    int uniform(int lo, int hi) {
        if (hi < lo) hi = lo;
        return std::uniform_int_distribution<int>(lo, hi)(rng);
    }
    double real(double lo, double hi) {
        if (hi < lo) hi = lo;
        return std::uniform_real_distribution<double>(lo, hi)(rng);
    }
};

}  // namespace

std::string_view category_name(Category c) { return kNames.at(static_cast<std::size_t>(c)); }

std::optional<Category> parse_category(std::string_view name) {
    for (std::size_t i = 0; i < kNames.size(); ++i)
        if (kNames[i] == name) return static_cast<Category>(i);
    return std::nullopt;
}

std::mt19937_64 object_rng(Category category, std::uint64_t seed) {
    return std::mt19937_64(seed ^ ((static_cast<std::uint64_t>(category) + 1) * 0x9E3779B97F4A7C15ull));
}

SyntheticObject gen_object(Category category, std::uint64_t seed, std::size_t side) {
    if (side < 8) fail(ErrorCode::InvalidArgument, "synthetic objects need side >= 8");
    auto rng = object_rng(category, seed);
    Draw d{rng};
    const int s = static_cast<int>(side);
    const int n = s - 2;  // interior extent
    const double mid = s / 2.0;
    Painter p(side);

    switch (category) {
        case Category::Box: {
            const int lo = std::max(2, s / 4);
            const int ex = d.uniform(lo, n), ey = d.uniform(lo, n), ez = d.uniform(lo, n);
            const int ox = d.uniform(1, s - 1 - ex), oy = d.uniform(1, s - 1 - ey), oz = d.uniform(1, s - 1 - ez);
            p.box(ox, ox + ex, oy, oy + ey, oz, oz + ez);
            break;
        }
        case Category::LShape: {
            const int lx = d.uniform(n / 2, n);
            const int lz = d.uniform(std::max(2, n / 4), std::max(2, n / 2));
            const int th = d.uniform(1, std::max(1, n / 6));
            const int wx = d.uniform(1, std::max(1, n / 5));
            const int hy = d.uniform(n / 2, n);
            const int x0 = 1 + d.uniform(0, n - lx), z0 = 1 + d.uniform(0, n - lz);
            p.box(x0, x0 + lx, 1, 1 + th, z0, z0 + lz);
            p.box(x0, x0 + wx, 1, 1 + hy, z0, z0 + lz);
            break;
        }
        case Category::Table: {
            const int lx = d.uniform(n / 2, n), lz = d.uniform(n / 2, n);
            const int h = d.uniform(n / 2, n);
            const int th = std::max(1, n / 10);
            const int leg = std::max(1, n / 8);
            const int x0 = 1 + d.uniform(0, n - lx), z0 = 1 + d.uniform(0, n - lz);
            p.box(x0, x0 + lx, 1 + h - th, 1 + h, z0, z0 + lz);
            for (const int lxo : {x0, x0 + lx - leg})
                for (const int lzo : {z0, z0 + lz - leg}) p.box(lxo, lxo + leg, 1, 1 + h - th, lzo, lzo + leg);
            break;
        }
        case Category::Chair: {
            const int lx = d.uniform(n / 3, 2 * n / 3 + 1), lz = d.uniform(n / 3, 2 * n / 3 + 1);
            const int hs = d.uniform(n / 3, n / 2);
            const int hb = d.uniform(n / 4, n - hs);
            const int th = std::max(1, n / 12);
            const int leg = std::max(1, n / 10);
            const int x0 = 1 + d.uniform(0, n - lx), z0 = 1 + d.uniform(0, n - lz);
            p.box(x0, x0 + lx, 1 + hs - th, 1 + hs, z0, z0 + lz);
            for (const int lxo : {x0, x0 + lx - leg})
                for (const int lzo : {z0, z0 + lz - leg}) p.box(lxo, lxo + leg, 1, 1 + hs - th, lzo, lzo + leg);
            p.box(x0, x0 + lx, 1 + hs, 1 + hs + hb, z0, z0 + th);
            break;
        }
        case Category::Lamp: {
            const double rb = d.real(n / 5.0, n / 3.0);
            const int tb = d.uniform(1, std::max(1, n / 10));
            const int hp = d.uniform(n / 2, 3 * n / 4);
            const int hsh = d.uniform(std::max(1, n / 6), std::max(1, n / 4));
            const double rs = d.real(n / 4.0, n / 2.0 - 0.5);
            p.cylinder(mid, mid, rb, 1, 1 + tb);
            const int pole = std::max(1, n / 12);
            const int c0 = s / 2 - pole / 2;
            p.box(c0, c0 + pole, 1, 1 + hp, c0, c0 + pole);
            for (int k = 0; k < hsh; ++k) {
                const double t = hsh > 1 ? double(k) / double(hsh - 1) : 0.0;
                p.disc(mid, 1 + hp + k, mid, rs * (1.0 - 0.5 * t));
            }
            break;
        }
        case Category::Cylinder: {
            const double r = d.real(std::max(1.0, n / 5.0), n / 2.0);
            const int h = d.uniform(n / 3, n);
            const int y0 = 1 + d.uniform(0, n - h);
            p.cylinder(mid, mid, r, y0, y0 + h);
            break;
        }
        case Category::Torus: {
            const double minor = d.real(std::max(0.8, n / 12.0), std::max(0.8, n / 6.0));
            const double major = d.real(std::max(minor + 0.5, n / 4.0), n / 2.0 - minor);
            const double cy = 1.0 + minor + d.real(0.0, std::max(0.0, n - 2.0 * minor));
            p.torus(mid, cy, mid, major, minor);
            break;
        }
        case Category::Composite: {
            const int levels = d.uniform(2, 3);
            int y = 1;
            int width = d.uniform(n / 2, n);
            for (int k = 0; k < levels && y < s - 2; ++k) {
                const int h = d.uniform(std::max(1, n / 8), std::max(1, n / 4));
                const int o = 1 + (n - width) / 2;
                p.box(o, o + width, y, y + h, o, o + width);
                y += h;
                width = std::max(2, width * 2 / 3);
            }
            const double r = std::min(width / 2.0, (s - 1 - y) / 2.0);
            if (r >= 0.5) p.ball(mid, y + r, mid, r);
            break;
        }
    }
    SyntheticObject obj{category, seed, std::move(p).finish()};
    if (obj.grid.occupied() == 0) fail(ErrorCode::EmptyVolume, "generator produced an empty object");
    return obj;
}

}  // namespace c2ft::data
