#include "c2ft/data/render.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

#include "c2ft/error.hpp"

namespace c2ft::data {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt3 = 1.7320508075688772;

// Exact values at multiples of 90 degrees keep opposite views mirror-exact.
std::array<double, 2> cos_sin(double deg) {
    const double turns = deg / 90.0;
    if (turns == std::floor(turns)) {
        static constexpr std::array<std::array<double, 2>, 4> kQuarter{{{1, 0}, {0, 1}, {-1, 0}, {0, -1}}};
        const long q = static_cast<long>(turns) % 4;
        return kQuarter[static_cast<std::size_t>(q < 0 ? q + 4 : q)];
    }
    const double r = deg * kPi / 180.0;
    return {std::cos(r), std::sin(r)};
}

float quantize(double v) {
    const double q = std::round(std::clamp(v, 0.0, 1.0) * 65535.0);
    return static_cast<float>(q / 65535.0);
}

struct Camera {
    double ca, sa, ce, se, k;
    // World point -> (centred column offset, centred row offset, closeness).
    std::array<double, 3> project(double x, double y, double z) const {
        const double xr = x * ca + z * sa;
        const double zr = -x * sa + z * ca;
        const double u = xr;
        const double v = y * ce - zr * se;
        const double d = zr * ce + y * se;
        return {u * k, -v * k, d};
    }
};

// Pixel indices j with centre offset j + 0.5 - S/2 inside [lo, hi].
std::array<long, 2> covered(double lo, double hi, std::size_t s) {
    const double half = static_cast<double>(s) / 2.0;
    long first = static_cast<long>(std::ceil(lo + half - 0.5));
    long last = static_cast<long>(std::floor(hi + half - 0.5));
    return {std::max(first, 0L), std::min(last, static_cast<long>(s) - 1)};
}

// Pixel(s) containing offset c; both neighbours when c sits on a boundary.
std::array<long, 2> containing(double c, std::size_t s) {
    const double p = c + static_cast<double>(s) / 2.0;
    long lo = static_cast<long>(std::ceil(p)) - 1;
    long hi = static_cast<long>(std::floor(p));
    return {std::clamp(lo, 0L, static_cast<long>(s) - 1), std::clamp(hi, 0L, static_cast<long>(s) - 1)};
}

}  // namespace

ViewImage ViewImage::blank(std::size_t size, std::size_t channels) {
    ViewImage img;
    img.size = size;
    img.channels = channels;
    img.values.assign(channels * size * size, 0.0f);
    return img;
}

void ViewImage::validate() const {
    if (size == 0 || channels == 0 || values.size() != channels * size * size)
        fail(ErrorCode::InvalidArgument, "view image extents are inconsistent");
    for (const float v : values)
        if (!(v >= 0.0f && v <= 1.0f)) fail(ErrorCode::InvalidArgument, "view image values must lie in [0, 1]");
}

std::vector<CameraPose> standard_poses(double elevation_deg) {
    std::vector<CameraPose> poses(kPoseCount);
    for (std::size_t i = 0; i < kPoseCount; ++i) poses[i] = CameraPose{i, elevation_deg, 1.0};
    return poses;
}

ViewImage render_view(const vox::VoxelGrid& grid, const CameraPose& pose, std::size_t out_size) {
    if (out_size == 0) fail(ErrorCode::InvalidArgument, "render size must be positive");
    const auto [ca, sa] = cos_sin(pose.azimuth_deg());
    const auto [ce, se] = cos_sin(pose.elevation_deg);
    const Camera cam{ca, sa, ce, se, static_cast<double>(out_size) * pose.scale / kSqrt3};

    const std::size_t v = grid.side();
    const double two_v = 2.0 * static_cast<double>(v);
    const double vd = static_cast<double>(v);
    // Centred coordinate of voxel boundary b in [0, V]: (2b - V) / 2V, exact
    // under index mirroring.
    auto coord = [&](double twice) { return (twice - vd) / two_v; };

    std::vector<double> nearest(out_size * out_size, -std::numeric_limits<double>::infinity());
    ViewImage img = ViewImage::blank(out_size, 2);
    for (std::size_t x = 0; x < v; ++x)
        for (std::size_t y = 0; y < v; ++y)
            for (std::size_t z = 0; z < v; ++z) {
                if (grid.at(x, y, z) < 0.5) continue;
                const double xi = 2.0 * static_cast<double>(x), yi = 2.0 * static_cast<double>(y),
                             zi = 2.0 * static_cast<double>(z);
                double umin = std::numeric_limits<double>::infinity(), umax = -umin;
                double rmin = umin, rmax = -umin;
                for (int corner = 0; corner < 8; ++corner) {
                    const double ox = (corner & 1) ? 2.0 : 0.0;
                    const double oy = (corner & 2) ? 2.0 : 0.0;
                    const double oz = (corner & 4) ? 2.0 : 0.0;
                    const auto p = cam.project(coord(xi + ox), coord(yi + oy), coord(zi + oz));
                    umin = std::min(umin, p[0]);
                    umax = std::max(umax, p[0]);
                    rmin = std::min(rmin, p[1]);
                    rmax = std::max(rmax, p[1]);
                }
                const auto centre = cam.project(coord(xi + 1.0), coord(yi + 1.0), coord(zi + 1.0));
                auto paint = [&](long row, long col) {
                    const std::size_t idx = static_cast<std::size_t>(row) * out_size + static_cast<std::size_t>(col);
                    nearest[idx] = std::max(nearest[idx], centre[2]);
                };
                const auto cols = covered(umin, umax, out_size);
                const auto rows = covered(rmin, rmax, out_size);
                for (long r = rows[0]; r <= rows[1]; ++r)
                    for (long c = cols[0]; c <= cols[1]; ++c) paint(r, c);
                const auto cc = containing(centre[0], out_size);
                const auto rc = containing(centre[1], out_size);
                for (long r : {rc[0], rc[1]})
                    for (long c : {cc[0], cc[1]}) paint(r, c);
            }

    const double reach = kSqrt3 / 2.0;
    for (std::size_t i = 0; i < nearest.size(); ++i) {
        if (nearest[i] == -std::numeric_limits<double>::infinity()) continue;
        img.values[i] = 1.0f;
        img.values[out_size * out_size + i] = quantize((nearest[i] + reach) / (2.0 * reach));
    }
    return img;
}

std::vector<ViewImage> render_views(const vox::VoxelGrid& grid, std::span<const CameraPose> poses,
                                    std::size_t out_size) {
    std::vector<ViewImage> out;
    out.reserve(poses.size());
    for (const auto& p : poses) out.push_back(render_view(grid, p, out_size));
    return out;
}

vox::Bytes write_pgm(const ViewImage& image, std::size_t channel) {
    if (channel >= image.channels) fail(ErrorCode::InvalidArgument, "no such channel");
    const std::string header = "P5\n" + std::to_string(image.size) + " " + std::to_string(image.size) + "\n65535\n";
    vox::Bytes out(header.begin(), header.end());
    const std::size_t plane = image.size * image.size;
    out.reserve(out.size() + 2 * plane);
    for (std::size_t i = 0; i < plane; ++i) {
        const double v = std::clamp(static_cast<double>(image.values[channel * plane + i]), 0.0, 1.0);
        const auto q = static_cast<std::uint16_t>(std::lround(v * 65535.0));
        out.push_back(static_cast<std::uint8_t>(q >> 8));
        out.push_back(static_cast<std::uint8_t>(q & 0xFF));
    }
    return out;
}

std::vector<float> read_pgm(std::span<const std::uint8_t> bytes, std::size_t& size) {
    // Header: magic, width, height, maxval separated by whitespace, then one
    // whitespace byte before the raster.
    std::size_t pos = 0;
    auto token = [&]() {
        while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
        std::string t;
        while (pos < bytes.size() && !std::isspace(bytes[pos])) t.push_back(static_cast<char>(bytes[pos++]));
        return t;
    };
    const std::string magic = token();
    if (magic != "P5") fail(ErrorCode::MalformedHeader, "expected a binary PGM (P5)");
    std::size_t w = 0, h = 0, maxval = 0;
    try {
        w = std::stoul(token());
        h = std::stoul(token());
        maxval = std::stoul(token());
    } catch (const std::exception&) {
        fail(ErrorCode::MalformedHeader, "unreadable PGM dimensions");
    }
    if (w == 0 || w != h || maxval != 65535) fail(ErrorCode::MalformedHeader, "expected a square 16-bit PGM");
    ++pos;
    if (pos > bytes.size() || bytes.size() - pos != 2 * w * h)
        fail(ErrorCode::SizeMismatch, "PGM raster length does not match its header");
    size = w;
    std::vector<float> plane(w * h);
    for (std::size_t i = 0; i < plane.size(); ++i) {
        const unsigned q = (unsigned(bytes[pos + 2 * i]) << 8) | bytes[pos + 2 * i + 1];
        plane[i] = static_cast<float>(static_cast<double>(q) / 65535.0);
    }
    return plane;
}

}  // namespace c2ft::data
