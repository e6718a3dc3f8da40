#include "c2ft/voxel/metrics.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "c2ft/error.hpp"

namespace c2ft::vox {

namespace {

void check_target(const VoxelGrid& target, const VoxelGrid& prediction) {
    if (target.side() != prediction.side()) fail(ErrorCode::ShapeMismatch, "metric operands have different sides");
    if (target.kind() != GridKind::Binary) fail(ErrorCode::InvalidArgument, "metric target must be a binary grid");
}

void check_threshold(double t) {
    if (!(t > 0.0 && t < 1.0)) fail(ErrorCode::InvalidArgument, "threshold must lie in (0,1)");
}

using Offset = std::array<int, 3>;

// All integer offsets within `radius` voxels (squared-distance test with a
// relative slack so that tau = k / side admits distance exactly k).
std::vector<Offset> ball_offsets(double radius) {
    const int r = static_cast<int>(std::floor(radius + 1e-9));
    const double limit = radius * radius * (1.0 + 1e-9);
    std::vector<Offset> offsets;
    for (int dx = -r; dx <= r; ++dx)
        for (int dy = -r; dy <= r; ++dy)
            for (int dz = -r; dz <= r; ++dz)
                if (double(dx * dx + dy * dy + dz * dz) <= limit) offsets.push_back({dx, dy, dz});
    return offsets;
}

// Fraction of occupied voxels in `from` having an occupied voxel of `to`
// within the ball.
double matched_fraction(const std::vector<char>& from, const std::vector<char>& to, std::size_t side,
                        const std::vector<Offset>& ball) {
    const int s = static_cast<int>(side);
    std::size_t total = 0;
    std::size_t hits = 0;
    for (int x = 0; x < s; ++x)
        for (int y = 0; y < s; ++y)
            for (int z = 0; z < s; ++z) {
                if (!from[static_cast<std::size_t>((x * s + y) * s + z)]) continue;
                ++total;
                for (const auto& o : ball) {
                    const int qx = x + o[0], qy = y + o[1], qz = z + o[2];
                    if (qx < 0 || qy < 0 || qz < 0 || qx >= s || qy >= s || qz >= s) continue;
                    if (to[static_cast<std::size_t>((qx * s + qy) * s + qz)]) {
                        ++hits;
                        break;
                    }
                }
            }
    return static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

double metric_iou(const VoxelGrid& target, const VoxelGrid& prediction, double threshold) {
    check_target(target, prediction);
    check_threshold(threshold);
    std::size_t inter = 0;
    std::size_t uni = 0;
    const auto& y = target.values();
    const auto& p = prediction.values();
    for (std::size_t i = 0; i < y.size(); ++i) {
        const bool a = y[i] >= 0.5;
        const bool b = p[i] >= threshold;
        inter += (a && b);
        uni += (a || b);
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

FScore metric_fscore(const VoxelGrid& target, const VoxelGrid& prediction, double threshold, double tau) {
    check_target(target, prediction);
    check_threshold(threshold);
    const std::size_t side = target.side();
    if (tau <= 0.0) tau = 1.0 / static_cast<double>(side);
    std::vector<char> gt(target.size());
    std::vector<char> pr(prediction.size());
    std::size_t n_gt = 0;
    std::size_t n_pr = 0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        gt[i] = target.values()[i] >= 0.5;
        pr[i] = prediction.values()[i] >= threshold;
        n_gt += gt[i];
        n_pr += pr[i];
    }
    if (n_gt == 0 || n_pr == 0) fail(ErrorCode::EmptyVolume, "F-score needs non-empty target and prediction");

    const auto ball = ball_offsets(tau * static_cast<double>(side));
    FScore out;
    out.precision = matched_fraction(pr, gt, side, ball);
    out.recall = matched_fraction(gt, pr, side, ball);
    const double denom = out.precision + out.recall;
    out.fscore = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
    return out;
}

}  // namespace c2ft::vox
