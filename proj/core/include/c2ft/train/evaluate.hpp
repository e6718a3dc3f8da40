#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "c2ft/data/dataset.hpp"
#include "c2ft/data/occlusion.hpp"
#include "c2ft/train/trainer.hpp"
#include "c2ft/voxel/grid.hpp"
#include "c2ft/voxel/metrics.hpp"

namespace c2ft::train {

inline constexpr std::array<std::size_t, 9> kViewCounts{1, 2, 3, 4, 5, 8, 12, 18, 20};
inline constexpr std::size_t kOcclusionViews = 12;

// Anything that turns views of one object into an occupancy grid. The object
// id lets oracle stubs look up ground truth; real models ignore it.
class Reconstructor {
   public:
    virtual ~Reconstructor() = default;
    virtual vox::VoxelGrid reconstruct(std::span<const data::ViewImage> views, std::size_t object_id) = 0;
};

// Inference with a trained model; records no autodiff history.
class ModelReconstructor : public Reconstructor {
   public:
    explicit ModelReconstructor(const TrainModel& model) : model_(&model) {}
    vox::VoxelGrid reconstruct(std::span<const data::ViewImage> views, std::size_t object_id) override;

   private:
    const TrainModel* model_;
};

struct EvalOptions {
    std::vector<std::size_t> view_counts{kViewCounts.begin(), kViewCounts.end()};
    double threshold = vox::kDefaultThreshold;
    double tau = 0.0;  // see vox::metric_fscore
    data::Split split = data::Split::Test;
};

struct MetricMean {
    double iou = 0.0;
    double fscore = 0.0;
    std::size_t objects = 0;
};

// One column of a report: a view count, or an occlusion box size.
struct EvalColumn {
    std::size_t key = 0;
    MetricMean overall;
    std::map<data::Category, MetricMean> per_category;
};

struct EvalReport {
    std::vector<EvalColumn> views;
    std::vector<EvalColumn> occlusion;
};

// Per-object means over the split, using the first k poses of each object for
// view count k. An empty binarised prediction scores F-score 0.
// MissingViews when k exceeds the views available; TooFewObjects on an empty
// split.
std::vector<EvalColumn> evaluate(Reconstructor& recon, const data::Dataset& dataset, const EvalOptions& opts);

// 12-view evaluation after occluding every other view with a box of each
// size (given at the 224-pixel reference and rescaled). Size 0 is the
// unoccluded baseline.
std::vector<EvalColumn> occlusion_sweep(Reconstructor& recon, const data::Dataset& dataset,
                                        std::span<const std::size_t> sizes, const EvalOptions& opts,
                                        std::size_t views = kOcclusionViews);

// Long form: one row per (key, category) with category "all" for the overall
// mean. Header: <key_name>,category,objects,iou,fscore.
std::string to_csv(std::span<const EvalColumn> columns, const std::string& key_name);
// Wide form: metrics as rows, keys as columns, then an IoU-per-category table.
std::string to_markdown(std::span<const EvalColumn> columns, const std::string& key_name);

}  // namespace c2ft::train
