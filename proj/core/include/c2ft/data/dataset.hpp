#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "c2ft/autodiff/tensor.hpp"
#include "c2ft/data/objects.hpp"
#include "c2ft/data/render.hpp"

namespace c2ft::data {

enum class Split : std::uint8_t { Train, Val, Test };

std::string_view split_name(Split s);
std::optional<Split> parse_split(std::string_view name);

struct SplitRatios {
    double train = 0.7;
    double val = 0.1;
    double test = 0.2;
};

// Stratified assignment. Global split sizes are the largest-remainder
// rounding of n * ratio; within each category the sizes differ from
// n_c * ratio by at most one object. Which objects land where is a seeded
// shuffle. InvalidArgument unless the ratios are non-negative and sum to 1;
// TooFewObjects if any split would be empty.
std::vector<Split> make_splits(std::span<const Category> categories, const SplitRatios& ratios, std::uint64_t seed);

struct RenderConfig {
    std::size_t volume_side = 16;
    std::size_t image_size = 32;
    std::size_t poses = kPoseCount;
    double elevation_deg = kDefaultElevation;
};

struct ManifestEntry {
    std::size_t id = 0;
    Category category = Category::Box;
    std::uint64_t seed = 0;
    Split split = Split::Train;

    friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
    RenderConfig render;
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> entries;

    std::vector<std::size_t> indices(Split s) const;
};

bool operator==(const RenderConfig& a, const RenderConfig& b);
bool operator==(const DatasetManifest& a, const DatasetManifest& b);

// Object i gets category i mod 8 and a seed derived from (seed, i).
DatasetManifest make_manifest(std::size_t n_objects, const RenderConfig& render, const SplitRatios& ratios,
                              std::uint64_t seed);

// Line-oriented text:
//   c2ft-manifest 1
//   volume_side <V> / image_size <S> / poses <P> / elevation <deg> / seed <s>
//   objects <n>
//   <id> <category> <seed> <split>     (n lines)
std::string write_manifest(const DatasetManifest& m);
// MalformedHeader on any unreadable line; CorruptRecord if the object count
// disagrees with the number of rows.
DatasetManifest parse_manifest(std::string_view text);

struct Dataset {
    DatasetManifest manifest;
    std::vector<vox::VoxelGrid> grids;
    std::vector<std::vector<ViewImage>> views;  // [object][pose]
};

Dataset synthesize(const DatasetManifest& manifest);

// Directory layout: manifest.txt, objects/<id>.binvox,
// views/<id>/<pose>_sil.pgm and <pose>_depth.pgm.
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

// Stacks the selected views into [k, C, S, S]. EmptyViewList when nothing is
// selected, MissingViews when an index is out of range.
template <std::floating_point T>
ad::Tensor<T> stack_views(std::span<const ViewImage> views, std::span<const std::size_t> indices);

}  // namespace c2ft::data
