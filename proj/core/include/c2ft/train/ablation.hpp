#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "c2ft/data/dataset.hpp"
#include "c2ft/train/config.hpp"
#include "c2ft/train/evaluate.hpp"

namespace c2ft::train {

struct AblationVariant {
    std::string name;
    TrainConfig config;
};

struct AblationRun {
    std::string variant;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
    std::vector<EvalColumn> eval;
};

// mse / ssim / total.
std::vector<AblationVariant> loss_variants(const TrainConfig& base);
// full / wr (refiner removed).
std::vector<AblationVariant> refiner_variants(const TrainConfig& base);
// Training view counts, named "train<k>".
std::vector<AblationVariant> train_view_variants(const TrainConfig& base, std::span<const std::size_t> counts);
// Encoder block counts J, named "J<j>".
std::vector<AblationVariant> block_variants(const TrainConfig& base, std::span<const std::size_t> blocks);

// Trains every variant once per seed (the seed replaces config.seed) and
// evaluates on opts.split. Runs are ordered variant-major.
std::vector<AblationRun> run_ablation(std::span<const AblationVariant> variants,
                                      std::span<const std::uint64_t> seeds, const data::Dataset& dataset,
                                      const EvalOptions& opts,
                                      const std::function<void(const AblationRun&)>& on_run = {});

// Mean IoU of `variant` at eval column `column` for each seed, in run order.
std::vector<double> ablation_ious(std::span<const AblationRun> runs, const std::string& variant,
                                  std::size_t column = 0);

// One row per run with the IoU at every evaluated view count, then a row of
// per-variant means.
std::string ablation_markdown(std::span<const AblationRun> runs);

}  // namespace c2ft::train
