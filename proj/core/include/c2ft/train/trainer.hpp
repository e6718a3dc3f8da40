#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "c2ft/autodiff/tensor.hpp"
#include "c2ft/data/dataset.hpp"
#include "c2ft/model/model.hpp"
#include "c2ft/train/config.hpp"

namespace c2ft::train {

using TrainModel = model::Model<float>;

// Where training stands. batch_in_epoch counts the batches of the current
// epoch already consumed; the view sampler state is the text form of the
// engine that draws view subsets.
struct TrainState {
    std::size_t epoch = 0;
    std::size_t iteration = 0;
    std::size_t batch_in_epoch = 0;
    std::string sampler_state;

    friend bool operator==(const TrainState&, const TrainState&) = default;
};

struct StepRecord {
    std::size_t iteration = 0;
    std::size_t epoch = 0;
    double lr = 0.0;
    double loss = 0.0;  // batch mean
};

// One training example: the input views [k, C, S, S] and the target [V, V, V].
struct Sample {
    ad::Tensor<float> images;
    ad::Tensor<float> target;
};

// Per-sample objective under the configured loss mode, including the
// auxiliary term on the decoder output when aux_weight > 0.
ad::Tensor<float> sample_loss(const TrainModel& model, const TrainConfig& cfg, const Sample& sample);

// Mean sample_loss over the batch. Backpropagates into the parameters when
// `backward` is set (grads accumulate, scaled by 1/batch).
double batch_loss(const TrainModel& model, const TrainConfig& cfg, std::span<const Sample> batch, bool backward);

ad::Tensor<float> grid_tensor(const vox::VoxelGrid& grid);

// Single-worker SGD. The model is initialised from (cfg.model, cfg.seed); the
// per-epoch object order comes from an engine seeded by (seed, epoch) and the
// view subsets from a persistent engine, so a run is a pure function of the
// config and the dataset, and resuming from a checkpoint continues the same
// trajectory.
class Trainer {
   public:
    // Checks the config, that the train split is non-empty (TooFewObjects),
    // that the dataset matches the model extents (SizeMismatch) and that every
    // object has view_pool views (MissingViews).
    Trainer(TrainConfig cfg, const data::Dataset& dataset);

    // One SGD step on the next batch. DivergedLoss when the loss or any
    // intermediate value stops being finite.
    StepRecord step();
    bool finished() const;
    // Steps until finished() or `limit` more steps have run.
    std::vector<StepRecord> run(std::size_t limit = SIZE_MAX,
                                const std::function<void(const StepRecord&)>& on_step = {});

    const TrainConfig& config() const { return cfg_; }
    TrainModel& model() { return model_; }
    const TrainModel& model() const { return model_; }
    TrainState state() const;
    const std::vector<std::vector<float>>& velocity() const { return velocity_; }

    // Continues from a saved state. Parameters are restored separately.
    void resume(const TrainState& state, std::vector<std::vector<float>> velocity);

    // The object ids of epoch `epoch` in visiting order.
    std::vector<std::size_t> epoch_order(std::size_t epoch) const;

   private:
    Sample make_sample(std::size_t object);

    TrainConfig cfg_;
    const data::Dataset* dataset_;
    TrainModel model_;
    std::vector<std::size_t> train_ids_;
    std::vector<ad::Tensor<float>> targets_;
    std::size_t batches_per_epoch_ = 0;
    std::size_t epoch_ = 0;
    std::size_t iteration_ = 0;
    std::size_t batch_in_epoch_ = 0;
    std::vector<std::size_t> order_;
    std::mt19937_64 sampler_;
    std::vector<std::vector<float>> velocity_;
};

}  // namespace c2ft::train
