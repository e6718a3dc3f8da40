#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "c2ft/data/dataset.hpp"
#include "c2ft/data/occlusion.hpp"
#include "c2ft/error.hpp"

namespace c2ft {
namespace {

using data::Category;
using data::ViewImage;
using vox::VoxelGrid;

template <class Fn>
void expect_error(ErrorCode code, Fn&& fn) {
    try {
        fn();
        FAIL() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

TEST(Objects, DeterministicNonEmptyWithMargin) {
    for (std::size_t side : {8u, 16u, 32u})
        for (Category c : data::kAllCategories)
            for (std::uint64_t seed = 0; seed < 100; ++seed) {
                const auto a = data::gen_object(c, seed, side);
                ASSERT_GT(a.grid.occupied(), 0u) << data::category_name(c) << " seed " << seed;
                ASSERT_EQ(a.grid.kind(), vox::GridKind::Binary);
                for (std::size_t x = 0; x < side; ++x)
                    for (std::size_t y = 0; y < side; ++y)
                        for (std::size_t z = 0; z < side; ++z) {
                            const bool border = x == 0 || y == 0 || z == 0 || x + 1 == side || y + 1 == side ||
                                                z + 1 == side;
                            if (border) ASSERT_EQ(a.grid.at(x, y, z), 0.0);
                        }
                if (seed < 5) EXPECT_EQ(data::gen_object(c, seed, side).grid, a.grid);
            }
    expect_error(ErrorCode::InvalidArgument, [] { data::gen_object(Category::Box, 1, 7); });
}

TEST(Objects, BoxExtentsFollowTheSeededTrace) {
    const std::size_t side = 32;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto rng = data::object_rng(Category::Box, seed);
        const int lo = 8;
        const int n = 30;
        std::uniform_int_distribution<int> ext(lo, n);
        const int ex = ext(rng), ey = ext(rng), ez = ext(rng);
        const auto grid = data::gen_object(Category::Box, seed, side).grid;
        EXPECT_EQ(grid.occupied(), std::size_t(ex * ey * ez));
        std::size_t xmin = side, xmax = 0;
        for (std::size_t x = 0; x < side; ++x)
            for (std::size_t y = 0; y < side; ++y)
                for (std::size_t z = 0; z < side; ++z)
                    if (grid.at(x, y, z) > 0) {
                        xmin = std::min(xmin, x);
                        xmax = std::max(xmax, x);
                    }
        EXPECT_EQ(int(xmax - xmin + 1), ex);
    }
}

TEST(Objects, CategoryNamesRoundTrip) {
    for (Category c : data::kAllCategories) EXPECT_EQ(data::parse_category(data::category_name(c)), c);
    EXPECT_FALSE(data::parse_category("sofa").has_value());
}

// Independent projection: pixel(s) that must hold the voxel centre.
std::vector<std::pair<long, long>> centre_pixels(std::size_t side, std::size_t x, std::size_t y, std::size_t z,
                                                 double az_deg, double el_deg, std::size_t s) {
    const double pi = std::acos(-1.0);
    const double a = az_deg * pi / 180.0, e = el_deg * pi / 180.0;
    const double px = (x + 0.5) / side - 0.5, py = (y + 0.5) / side - 0.5, pz = (z + 0.5) / side - 0.5;
    const double xr = px * std::cos(a) + pz * std::sin(a);
    const double zr = -px * std::sin(a) + pz * std::cos(a);
    const double v = py * std::cos(e) - zr * std::sin(e);
    const double k = double(s) / std::sqrt(3.0);
    const double col = xr * k + s / 2.0;
    const double row = -v * k + s / 2.0;
    std::vector<std::pair<long, long>> out;
    auto cands = [](double p) {
        std::vector<long> c{long(std::floor(p))};
        if (std::abs(p - std::round(p)) < 1e-9) c = {long(std::round(p)) - 1, long(std::round(p))};
        return c;
    };
    for (long r : cands(row))
        for (long c : cands(col)) out.emplace_back(r, c);
    return out;
}

TEST(Render, EveryOccupiedVoxelLandsOnTheSilhouette) {
    const auto poses = data::standard_poses();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto obj = data::gen_object(data::kAllCategories[seed % 8], seed, 16);
        const auto views = data::render_views(obj.grid, poses, 32);
        for (std::size_t p = 0; p < poses.size(); ++p) {
            views[p].validate();
            for (std::size_t x = 0; x < 16; ++x)
                for (std::size_t y = 0; y < 16; ++y)
                    for (std::size_t z = 0; z < 16; ++z) {
                        if (obj.grid.at(x, y, z) == 0) continue;
                        bool hit = false;
                        for (auto [r, c] : centre_pixels(16, x, y, z, poses[p].azimuth_deg(), 30.0, 32))
                            hit = hit || views[p].at(0, std::size_t(r), std::size_t(c)) == 1.0f;
                        ASSERT_TRUE(hit) << "seed " << seed << " pose " << p;
                    }
        }
    }
}

TEST(Render, CentreVoxelHitsImageCentre) {
    auto g = VoxelGrid::zeros(9);
    g.set(4, 4, 4, 1.0);
    for (const auto& pose : data::standard_poses()) {
        const auto img = data::render_view(g, pose, 32);
        std::size_t fg = 0;
        for (std::size_t r = 14; r < 18; ++r)
            for (std::size_t c = 14; c < 18; ++c) fg += img.at(0, r, c) > 0;
        EXPECT_GE(fg, 1u);
    }
}

TEST(Render, OppositeViewsOfMirrorSymmetricObjectAreMirrored) {
    // Symmetric under z -> side-1-z, deliberately lopsided in x and y.
    const std::size_t side = 16;
    auto g = VoxelGrid::zeros(side);
    for (std::size_t x = 2; x < 11; ++x)
        for (std::size_t y = 1; y < 5; ++y)
            for (std::size_t z = 3; z < 13; ++z) g.set(x, y, z, 1.0);
    for (std::size_t y = 5; y < 13; ++y)
        for (std::size_t z = 6; z < 10; ++z) g.set(2, y, z, 1.0);
    for (std::size_t s : {32u, 40u}) {
        const auto front = data::render_view(g, data::CameraPose{0}, s);
        const auto back = data::render_view(g, data::CameraPose{12}, s);
        for (std::size_t r = 0; r < s; ++r)
            for (std::size_t c = 0; c < s; ++c) ASSERT_EQ(front.at(0, r, c), back.at(0, r, s - 1 - c)) << r << "," << c;
    }
}

TEST(Render, BackgroundIsZeroAndDepthInRange) {
    const auto obj = data::gen_object(Category::Chair, 3, 16);
    const auto img = data::render_view(obj.grid, data::CameraPose{5}, 32);
    for (std::size_t r = 0; r < 32; ++r)
        for (std::size_t c = 0; c < 32; ++c) {
            if (img.at(0, r, c) == 0.0f) EXPECT_EQ(img.at(1, r, c), 0.0f);
            EXPECT_GE(img.at(1, r, c), 0.0f);
            EXPECT_LE(img.at(1, r, c), 1.0f);
        }
}

TEST(Pgm, RoundTripAndErrors) {
    const auto obj = data::gen_object(Category::Lamp, 4, 16);
    const auto img = data::render_view(obj.grid, data::CameraPose{7}, 32);
    for (std::size_t ch = 0; ch < 2; ++ch) {
        std::size_t size = 0;
        const auto plane = data::read_pgm(data::write_pgm(img, ch), size);
        ASSERT_EQ(size, 32u);
        for (std::size_t i = 0; i < plane.size(); ++i) EXPECT_EQ(plane[i], img.values[ch * 1024 + i]);
    }
    auto bytes = data::write_pgm(img, 0);
    std::size_t size = 0;
    auto bad = bytes;
    bad[1] = '2';
    expect_error(ErrorCode::MalformedHeader, [&] { data::read_pgm(bad, size); });
    bytes.pop_back();
    expect_error(ErrorCode::SizeMismatch, [&] { data::read_pgm(bytes, size); });
}

std::vector<ViewImage> filled_views(std::size_t n, std::size_t s) {
    std::vector<ViewImage> v(n, ViewImage::blank(s));
    for (std::size_t i = 0; i < n; ++i)
        for (auto& x : v[i].values) x = 0.25f + 0.05f * float(i);
    return v;
}

TEST(Occlusion, LimitCases) {
    const auto views = filled_views(3, 32);
    const auto full = data::occlude(views, 32);
    for (float x : full[0].values) EXPECT_EQ(x, 0.0f);
    EXPECT_EQ(full[1], views[1]);
    for (float x : full[2].values) EXPECT_EQ(x, 0.0f);
    EXPECT_EQ(data::occlude(views, 0), views);
    expect_error(ErrorCode::BoxLargerThanImage, [&] { data::occlude(views, 33); });
    EXPECT_EQ(data::scale_box(10, 224), 10u);
    EXPECT_EQ(data::scale_box(40, 32), 6u);
    EXPECT_EQ(data::scale_box(10, 64), 3u);
}

TEST(Occlusion, ExactlyBoxSquaredPixelsOnOddViewsOnly) {
    const auto views = filled_views(5, 32);
    for (auto mode : {data::OcclusionMode::Center, data::OcclusionMode::Random})
        for (std::size_t box : {1u, 3u, 6u, 11u, 31u}) {
            const auto out = data::occlude(views, box, mode, 99);
            for (std::size_t i = 0; i < views.size(); ++i) {
                std::size_t changed = 0;
                std::size_t rmin = 32, rmax = 0, cmin = 32, cmax = 0;
                for (std::size_t r = 0; r < 32; ++r)
                    for (std::size_t c = 0; c < 32; ++c)
                        if (out[i].at(0, r, c) != views[i].at(0, r, c)) {
                            ++changed;
                            rmin = std::min(rmin, r), rmax = std::max(rmax, r);
                            cmin = std::min(cmin, c), cmax = std::max(cmax, c);
                        }
                if (i % 2 == 0) {
                    EXPECT_EQ(changed, box * box);
                    EXPECT_EQ(rmax - rmin + 1, box);
                    EXPECT_EQ(cmax - cmin + 1, box);
                } else {
                    EXPECT_EQ(out[i], views[i]);
                }
            }
        }
}

TEST(Occlusion, CentredOnSilhouetteBoundingBox) {
    auto img = ViewImage::blank(32);
    for (std::size_t r = 4; r < 10; ++r)
        for (std::size_t c = 20; c < 30; ++c) img.at(0, r, c) = 1.0f;
    const auto out = data::occlude({img}, 4);
    // Bounding box rows 4..9, cols 20..29 -> centre (7, 25); box rows 5..8, cols 23..26.
    for (std::size_t r = 4; r < 10; ++r)
        for (std::size_t c = 20; c < 30; ++c) {
            const bool inside = r >= 5 && r < 9 && c >= 23 && c < 27;
            EXPECT_EQ(out[0].at(0, r, c), inside ? 0.0f : 1.0f) << r << "," << c;
        }
}

TEST(Splits, ExamplesAndDeterminism) {
    std::vector<Category> cats(10);
    for (std::size_t i = 0; i < 10; ++i) cats[i] = data::kAllCategories[i % 8];
    const auto s = data::make_splits(cats, {}, 5);
    EXPECT_EQ(std::count(s.begin(), s.end(), data::Split::Train), 7);
    EXPECT_EQ(std::count(s.begin(), s.end(), data::Split::Val), 1);
    EXPECT_EQ(std::count(s.begin(), s.end(), data::Split::Test), 2);
    EXPECT_EQ(data::make_splits(cats, {}, 5), s);
    expect_error(ErrorCode::TooFewObjects, [&] { data::make_splits(std::span(cats).first(3), {}, 1); });
    expect_error(ErrorCode::InvalidArgument, [&] { data::make_splits(cats, {0.5, 0.1, 0.1}, 1); });
}

TEST(Splits, StratifiedWithinOneObjectPerCategory) {
    std::mt19937 rng(40);
    for (std::size_t n = 10; n <= 240; n += 7) {
        std::vector<Category> cats(n);
        std::uniform_int_distribution<int> pick(0, 7);
        for (auto& c : cats) c = data::kAllCategories[std::size_t(pick(rng))];
        const auto s = data::make_splits(cats, {}, n);
        const double ratios[3] = {0.7, 0.1, 0.2};
        for (Category c : data::kAllCategories) {
            std::size_t nc = 0, k[3] = {0, 0, 0};
            for (std::size_t i = 0; i < n; ++i)
                if (cats[i] == c) {
                    ++nc;
                    ++k[static_cast<int>(s[i])];
                }
            for (int j = 0; j < 3; ++j) EXPECT_LE(std::abs(double(k[j]) - nc * ratios[j]), 1.0 + 1e-9) << n;
        }
    }
}

TEST(Manifest, TextRoundTripAndErrors) {
    const auto m = data::make_manifest(20, data::RenderConfig{8, 32, 24, 30.0}, {}, 11);
    EXPECT_EQ(data::parse_manifest(data::write_manifest(m)), m);
    EXPECT_EQ(m.indices(data::Split::Train).size(), 14u);
    EXPECT_EQ(m.indices(data::Split::Val).size(), 2u);
    EXPECT_EQ(m.indices(data::Split::Test).size(), 4u);
    auto text = data::write_manifest(m);
    expect_error(ErrorCode::MalformedHeader, [&] { data::parse_manifest("c2ft-manifest 2\n"); });
    expect_error(ErrorCode::CorruptRecord, [&] { data::parse_manifest(text.substr(0, text.rfind('\n', text.size() - 2) + 1)); });
}

TEST(Dataset, SynthesisIsDeterministicAndSurvivesDisk) {
    const auto m = data::make_manifest(10, data::RenderConfig{8, 32, 6, 30.0}, {}, 3);
    const auto a = data::synthesize(m);
    const auto b = data::synthesize(m);
    EXPECT_EQ(a.grids, b.grids);
    EXPECT_EQ(a.views, b.views);
    const auto dir = std::filesystem::temp_directory_path() / "c2ft_dataset_test";
    std::filesystem::remove_all(dir);
    data::save_dataset(a, dir);
    const auto c = data::load_dataset(dir);
    EXPECT_EQ(c.manifest, a.manifest);
    EXPECT_EQ(c.grids, a.grids);
    EXPECT_EQ(c.views, a.views);
    std::filesystem::remove_all(dir);
}

TEST(Dataset, StackViewsErrors) {
    const auto views = filled_views(4, 32);
    const std::vector<std::size_t> pick{2, 0};
    const auto t = data::stack_views<float>(views, pick);
    EXPECT_EQ(t.shape(), (ad::Shape{2, 2, 32, 32}));
    EXPECT_EQ(t.data()[0], views[2].values[0]);
    expect_error(ErrorCode::EmptyViewList, [&] { data::stack_views<float>(views, {}); });
    const std::vector<std::size_t> missing{1, 4};
    expect_error(ErrorCode::MissingViews, [&] { data::stack_views<float>(views, missing); });
}

}  // namespace
}  // namespace c2ft
