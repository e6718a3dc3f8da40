#include "c2ft/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "c2ft/error.hpp"
#include "c2ft/voxel/io.hpp"

namespace c2ft::data {

namespace {

constexpr std::array<std::string_view, 3> kSplitNames{"train", "val", "test"};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Largest-remainder rounding of n * ratios; ties go to the earlier split.
std::array<std::size_t, 3> apportion(std::size_t n, const std::array<double, 3>& r) {
    std::array<std::size_t, 3> out{};
    std::array<double, 3> frac{};
    std::size_t used = 0;
    for (std::size_t s = 0; s < 3; ++s) {
        const double q = static_cast<double>(n) * r[s];
        out[s] = static_cast<std::size_t>(std::floor(q + 1e-9));
        frac[s] = q - static_cast<double>(out[s]);
        used += out[s];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t k = 0; used < n; ++k, ++used) ++out[order[k % 3]];
    return out;
}

std::string pose_stem(const std::filesystem::path& dir, std::size_t id, std::size_t pose) {
    return (dir / "views" / std::to_string(id) / std::to_string(pose)).string();
}

}  // namespace

std::string_view split_name(Split s) { return kSplitNames.at(static_cast<std::size_t>(s)); }

std::optional<Split> parse_split(std::string_view name) {
    for (std::size_t i = 0; i < kSplitNames.size(); ++i)
        if (kSplitNames[i] == name) return static_cast<Split>(i);
    return std::nullopt;
}

std::vector<Split> make_splits(std::span<const Category> categories, const SplitRatios& ratios, std::uint64_t seed) {
    const std::array<double, 3> r{ratios.train, ratios.val, ratios.test};
    if (r[0] < 0 || r[1] < 0 || r[2] < 0 || std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9)
        fail(ErrorCode::InvalidArgument, "split ratios must be non-negative and sum to 1");
    const std::size_t n = categories.size();
    const auto target = apportion(n, r);
    for (std::size_t s = 0; s < 3; ++s)
        if (target[s] == 0)
            fail(ErrorCode::TooFewObjects,
                 std::to_string(n) + " objects leave the " + std::string(kSplitNames[s]) + " split empty");

    // Per-category floors, then hand out the leftover objects so that every
    // category gets at most one extra per split and global totals hit target.
    std::vector<std::vector<std::size_t>> members(kCategoryCount);
    for (std::size_t i = 0; i < n; ++i) members[static_cast<std::size_t>(categories[i])].push_back(i);
    std::vector<std::array<std::size_t, 3>> counts(kCategoryCount);
    std::vector<std::array<double, 3>> fracs(kCategoryCount);
    std::array<std::ptrdiff_t, 3> remaining{};
    for (std::size_t s = 0; s < 3; ++s) remaining[s] = static_cast<std::ptrdiff_t>(target[s]);
    std::vector<std::size_t> extras(kCategoryCount, 0);
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        const double nc = static_cast<double>(members[c].size());
        std::size_t used = 0;
        for (std::size_t s = 0; s < 3; ++s) {
            counts[c][s] = static_cast<std::size_t>(std::floor(nc * r[s] + 1e-9));
            fracs[c][s] = nc * r[s] - static_cast<double>(counts[c][s]);
            used += counts[c][s];
            remaining[s] -= static_cast<std::ptrdiff_t>(counts[c][s]);
        }
        extras[c] = members[c].size() - used;
    }

    std::mt19937_64 rng(seed);
    std::vector<std::size_t> cat_order(kCategoryCount);
    std::iota(cat_order.begin(), cat_order.end(), 0);
    std::shuffle(cat_order.begin(), cat_order.end(), rng);
    std::stable_sort(cat_order.begin(), cat_order.end(),
                     [&](std::size_t a, std::size_t b) { return extras[a] > extras[b]; });
    for (const std::size_t c : cat_order) {
        std::array<std::size_t, 3> order{0, 1, 2};
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (remaining[a] != remaining[b]) return remaining[a] > remaining[b];
            return fracs[c][a] > fracs[c][b];
        });
        for (std::size_t k = 0; k < extras[c]; ++k) {
            const std::size_t s = order[k];
            if (remaining[s] <= 0) fail(ErrorCode::InvalidArgument, "stratified split could not meet the targets");
            ++counts[c][s];
            --remaining[s];
        }
    }

    std::vector<Split> out(n, Split::Train);
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        auto& ids = members[c];
        std::shuffle(ids.begin(), ids.end(), rng);
        std::size_t k = 0;
        for (std::size_t s = 0; s < 3; ++s)
            for (std::size_t j = 0; j < counts[c][s]; ++j) out[ids[k++]] = static_cast<Split>(s);
    }
    return out;
}

std::vector<std::size_t> DatasetManifest::indices(Split s) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries.size(); ++i)
        if (entries[i].split == s) out.push_back(i);
    return out;
}

bool operator==(const RenderConfig& a, const RenderConfig& b) {
    return a.volume_side == b.volume_side && a.image_size == b.image_size && a.poses == b.poses &&
           a.elevation_deg == b.elevation_deg;
}

bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.render == b.render && a.seed == b.seed && a.entries == b.entries;
}

DatasetManifest make_manifest(std::size_t n_objects, const RenderConfig& render, const SplitRatios& ratios,
                              std::uint64_t seed) {
    if (render.poses == 0 || render.poses > kPoseCount)
        fail(ErrorCode::InvalidArgument, "pose count must lie in [1, 24]");
    DatasetManifest m;
    m.render = render;
    m.seed = seed;
    std::vector<Category> cats(n_objects);
    for (std::size_t i = 0; i < n_objects; ++i) cats[i] = kAllCategories[i % kCategoryCount];
    const auto splits = make_splits(cats, ratios, seed);
    for (std::size_t i = 0; i < n_objects; ++i)
        m.entries.push_back(ManifestEntry{i, cats[i], splitmix64(seed ^ splitmix64(i)), splits[i]});
    return m;
}

std::string write_manifest(const DatasetManifest& m) {
    std::ostringstream out;
    out.precision(17);
    out << "c2ft-manifest 1\n"
        << "volume_side " << m.render.volume_side << '\n'
        << "image_size " << m.render.image_size << '\n'
        << "poses " << m.render.poses << '\n'
        << "elevation " << m.render.elevation_deg << '\n'
        << "seed " << m.seed << '\n'
        << "objects " << m.entries.size() << '\n';
    for (const auto& e : m.entries)
        out << e.id << ' ' << category_name(e.category) << ' ' << e.seed << ' ' << split_name(e.split) << '\n';
    return out.str();
}

DatasetManifest parse_manifest(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    auto expect_key = [&](const char* key) {
        if (!std::getline(in, line)) fail(ErrorCode::MalformedHeader, std::string("manifest ends before ") + key);
        std::istringstream ls(line);
        std::string k;
        ls >> k;
        if (k != key) fail(ErrorCode::MalformedHeader, "expected '" + std::string(key) + "', got '" + line + "'");
        return ls.str().substr(k.size());
    };
    auto number = [](const std::string& s, const char* key) {
        std::istringstream ls(s);
        double v = 0;
        if (!(ls >> v)) fail(ErrorCode::MalformedHeader, std::string("bad value for ") + key);
        return v;
    };
    auto unsigned_value = [](const std::string& s, const char* key) {
        std::istringstream ls(s);
        std::uint64_t v = 0;
        if (!(ls >> v)) fail(ErrorCode::MalformedHeader, std::string("bad value for ") + key);
        return v;
    };

    if (!std::getline(in, line) || line != "c2ft-manifest 1")
        fail(ErrorCode::MalformedHeader, "missing 'c2ft-manifest 1' header");
    DatasetManifest m;
    m.render.volume_side = unsigned_value(expect_key("volume_side"), "volume_side");
    m.render.image_size = unsigned_value(expect_key("image_size"), "image_size");
    m.render.poses = unsigned_value(expect_key("poses"), "poses");
    m.render.elevation_deg = number(expect_key("elevation"), "elevation");
    m.seed = unsigned_value(expect_key("seed"), "seed");
    const std::size_t count = unsigned_value(expect_key("objects"), "objects");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        ManifestEntry e;
        std::string cat, split;
        if (!(ls >> e.id >> cat >> e.seed >> split)) fail(ErrorCode::MalformedHeader, "bad object row '" + line + "'");
        const auto c = parse_category(cat);
        const auto s = parse_split(split);
        if (!c || !s) fail(ErrorCode::MalformedHeader, "unknown category or split in '" + line + "'");
        e.category = *c;
        e.split = *s;
        m.entries.push_back(e);
    }
    if (m.entries.size() != count)
        fail(ErrorCode::CorruptRecord, "manifest lists " + std::to_string(m.entries.size()) + " objects, header says " +
                                           std::to_string(count));
    return m;
}

Dataset synthesize(const DatasetManifest& manifest) {
    Dataset ds;
    ds.manifest = manifest;
    auto poses = standard_poses(manifest.render.elevation_deg);
    poses.resize(manifest.render.poses);
    for (const auto& e : manifest.entries) {
        auto obj = gen_object(e.category, e.seed, manifest.render.volume_side);
        ds.views.push_back(render_views(obj.grid, poses, manifest.render.image_size));
        ds.grids.push_back(std::move(obj.grid));
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& dir) {
    const std::string text = write_manifest(ds.manifest);
    vox::write_file(dir / "manifest.txt", vox::Bytes(text.begin(), text.end()));
    for (std::size_t i = 0; i < ds.manifest.entries.size(); ++i) {
        const std::size_t id = ds.manifest.entries[i].id;
        vox::write_file(dir / "objects" / (std::to_string(id) + ".binvox"), vox::write_binvox(ds.grids[i]));
        for (std::size_t p = 0; p < ds.views[i].size(); ++p) {
            const std::string stem = pose_stem(dir, id, p);
            vox::write_file(stem + "_sil.pgm", write_pgm(ds.views[i][p], 0));
            vox::write_file(stem + "_depth.pgm", write_pgm(ds.views[i][p], 1));
        }
    }
}

Dataset load_dataset(const std::filesystem::path& dir) {
    const auto text = vox::read_file(dir / "manifest.txt");
    Dataset ds;
    ds.manifest = parse_manifest(std::string_view(reinterpret_cast<const char*>(text.data()), text.size()));
    const std::size_t s = ds.manifest.render.image_size;
    for (const auto& e : ds.manifest.entries) {
        auto grid = vox::read_binvox(vox::read_file(dir / "objects" / (std::to_string(e.id) + ".binvox")));
        if (grid.side() != ds.manifest.render.volume_side)
            fail(ErrorCode::DimMismatch, "object " + std::to_string(e.id) + " has the wrong grid side");
        ds.grids.push_back(std::move(grid));
        std::vector<ViewImage> views;
        for (std::size_t p = 0; p < ds.manifest.render.poses; ++p) {
            const std::string stem = pose_stem(dir, e.id, p);
            ViewImage img = ViewImage::blank(s, 2);
            for (std::size_t ch = 0; ch < 2; ++ch) {
                std::size_t got = 0;
                const auto plane = read_pgm(vox::read_file(stem + (ch == 0 ? "_sil.pgm" : "_depth.pgm")), got);
                if (got != s) fail(ErrorCode::SizeMismatch, "view " + stem + " has the wrong size");
                std::copy(plane.begin(), plane.end(), img.values.begin() + static_cast<std::ptrdiff_t>(ch * s * s));
            }
            views.push_back(std::move(img));
        }
        ds.views.push_back(std::move(views));
    }
    return ds;
}

template <std::floating_point T>
ad::Tensor<T> stack_views(std::span<const ViewImage> views, std::span<const std::size_t> indices) {
    if (indices.empty()) fail(ErrorCode::EmptyViewList, "no views selected");
    for (const auto i : indices)
        if (i >= views.size())
            fail(ErrorCode::MissingViews,
                 "view " + std::to_string(i) + " requested, only " + std::to_string(views.size()) + " available");
    const auto& first = views[indices[0]];
    const std::size_t per = first.values.size();
    std::vector<T> out;
    out.reserve(per * indices.size());
    for (const auto i : indices) {
        if (views[i].size != first.size || views[i].channels != first.channels)
            fail(ErrorCode::ShapeMismatch, "views differ in size");
        for (const float v : views[i].values) out.push_back(static_cast<T>(v));
    }
    return ad::Tensor<T>::from({indices.size(), first.channels, first.size, first.size}, std::move(out));
}

template ad::Tensor<float> stack_views<float>(std::span<const ViewImage>, std::span<const std::size_t>);
template ad::Tensor<double> stack_views<double>(std::span<const ViewImage>, std::span<const std::size_t>);

}  // namespace c2ft::data
