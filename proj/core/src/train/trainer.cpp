#include "c2ft/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "c2ft/autodiff/ops.hpp"
#include "c2ft/autodiff/optim.hpp"
#include "c2ft/error.hpp"
#include "c2ft/voxel/losses.hpp"

namespace c2ft::train {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

ad::Tensor<float> mode_loss(LossMode mode, const ad::Tensor<float>& target, const ad::Tensor<float>& pred) {
    switch (mode) {
        case LossMode::Mse: return vox::loss_mse(target, pred);
        case LossMode::Ssim: return vox::loss_ssim3d(target, pred);
        case LossMode::Total: return vox::loss_total(target, pred);
    }
    fail(ErrorCode::InvalidArgument, "unknown loss mode");
}

}  // namespace

ad::Tensor<float> grid_tensor(const vox::VoxelGrid& grid) {
    const std::size_t v = grid.side();
    std::vector<float> values(grid.values().begin(), grid.values().end());
    return ad::Tensor<float>::from({v, v, v}, std::move(values));
}

ad::Tensor<float> sample_loss(const TrainModel& model, const TrainConfig& cfg, const Sample& sample) {
    const auto out = model.forward(sample.images);
    auto loss = mode_loss(cfg.loss, sample.target, out.volume);
    if (cfg.aux_weight > 0.0 && model.config().refiner_enabled)
        loss = loss + ad::scale(mode_loss(cfg.loss, sample.target, out.coarse), static_cast<float>(cfg.aux_weight));
    return loss;
}

double batch_loss(const TrainModel& model, const TrainConfig& cfg, std::span<const Sample> batch, bool backward) {
    if (batch.empty()) fail(ErrorCode::InvalidArgument, "empty batch");
    const float inv = 1.0f / static_cast<float>(batch.size());
    double total = 0.0;
    for (const Sample& s : batch) {
        const auto loss = sample_loss(model, cfg, s);
        total += static_cast<double>(loss.item());
        if (backward) ad::scale(loss, inv).backward();
    }
    return total / static_cast<double>(batch.size());
}

Trainer::Trainer(TrainConfig cfg, const data::Dataset& dataset)
    : cfg_(std::move(cfg)), dataset_(&dataset), model_((cfg_.validate(), cfg_.model), cfg_.seed) {
    const auto& render = dataset.manifest.render;
    if (render.volume_side != cfg_.model.volume_side || render.image_size != cfg_.model.image_size)
        fail(ErrorCode::SizeMismatch, "dataset extents (volume " + std::to_string(render.volume_side) + ", image " +
                                          std::to_string(render.image_size) + ") differ from the model config");
    train_ids_ = dataset.manifest.indices(data::Split::Train);
    if (train_ids_.empty()) fail(ErrorCode::TooFewObjects, "the train split is empty");
    for (const std::size_t id : train_ids_) {
        if (dataset.views.at(id).size() < cfg_.view_pool)
            fail(ErrorCode::MissingViews, "object " + std::to_string(id) + " has " +
                                              std::to_string(dataset.views[id].size()) + " views, view_pool is " +
                                              std::to_string(cfg_.view_pool));
        if (dataset.views[id].front().channels != cfg_.model.image_channels)
            fail(ErrorCode::SizeMismatch, "image channel count differs from the model config");
    }
    targets_.resize(dataset.grids.size());
    for (const std::size_t id : train_ids_) targets_[id] = grid_tensor(dataset.grids[id]);
    batches_per_epoch_ = (train_ids_.size() + cfg_.batch_size - 1) / cfg_.batch_size;
    sampler_.seed(splitmix64(cfg_.seed ^ 0x76696577ull));
    if (cfg_.momentum > 0.0)
        for (const auto& p : model_.params().tensors()) velocity_.emplace_back(p.numel(), 0.0f);
}

std::vector<std::size_t> Trainer::epoch_order(std::size_t epoch) const {
    std::vector<std::size_t> order = train_ids_;
    std::mt19937_64 rng(splitmix64(cfg_.seed) ^ splitmix64(epoch + 1));
    std::shuffle(order.begin(), order.end(), rng);
    return order;
}

Sample Trainer::make_sample(std::size_t object) {
    std::vector<std::size_t> pool(cfg_.view_pool);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::shuffle(pool.begin(), pool.end(), sampler_);
    pool.resize(cfg_.views_per_sample);
    return {data::stack_views<float>(dataset_->views[object], pool), targets_[object]};
}

bool Trainer::finished() const {
    return epoch_ >= cfg_.epochs || (cfg_.max_iterations != 0 && iteration_ >= cfg_.max_iterations);
}

StepRecord Trainer::step() {
    if (finished()) fail(ErrorCode::InvalidArgument, "training has already finished");
    if (batch_in_epoch_ == 0 || order_.empty()) order_ = epoch_order(epoch_);

    const std::size_t begin = batch_in_epoch_ * cfg_.batch_size;
    const std::size_t end = std::min(begin + cfg_.batch_size, order_.size());
    std::vector<Sample> batch;
    for (std::size_t i = begin; i < end; ++i) batch.push_back(make_sample(order_[i]));

    StepRecord rec{iteration_, epoch_, cfg_.lr_at(epoch_), 0.0};
    auto& params = model_.params();
    params.zero_grad();
    try {
        rec.loss = batch_loss(model_, cfg_, batch, true);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::NonFinite) throw;
        fail(ErrorCode::DivergedLoss, "iteration " + std::to_string(iteration_) + ": " + e.what());
    }
    if (!std::isfinite(rec.loss))
        fail(ErrorCode::DivergedLoss, "iteration " + std::to_string(iteration_) + ": loss is not finite");

    float gscale = 1.0f;
    if (cfg_.clip_norm > 0.0) {
        double sq = 0.0;
        for (const auto& p : params.tensors())
            for (const float g : p.grad()) sq += static_cast<double>(g) * g;
        const double norm = std::sqrt(sq);
        if (norm > cfg_.clip_norm) gscale = static_cast<float>(cfg_.clip_norm / norm);
    }
    const auto lr = static_cast<float>(rec.lr);
    if (velocity_.empty() && gscale == 1.0f) {
        ad::sgd_step<float>(params.tensors(), lr);
    } else {
        const auto m = static_cast<float>(cfg_.momentum);
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (!params[i].has_grad()) continue;
            auto p = params[i].mutable_data();
            const auto g = params[i].grad();
            if (velocity_.empty()) {
                for (std::size_t j = 0; j < p.size(); ++j) p[j] -= lr * (gscale * g[j]);
                continue;
            }
            auto& v = velocity_[i];
            for (std::size_t j = 0; j < p.size(); ++j) {
                v[j] = m * v[j] + gscale * g[j];
                p[j] -= lr * v[j];
            }
        }
    }

    ++iteration_;
    if (++batch_in_epoch_ == batches_per_epoch_) {
        ++epoch_;
        batch_in_epoch_ = 0;
    }
    return rec;
}

std::vector<StepRecord> Trainer::run(std::size_t limit, const std::function<void(const StepRecord&)>& on_step) {
    std::vector<StepRecord> curve;
    while (!finished() && curve.size() < limit) {
        curve.push_back(step());
        if (on_step) on_step(curve.back());
    }
    return curve;
}

TrainState Trainer::state() const {
    std::ostringstream out;
    out << sampler_;
    return {epoch_, iteration_, batch_in_epoch_, out.str()};
}

void Trainer::resume(const TrainState& state, std::vector<std::vector<float>> velocity) {
    if (state.batch_in_epoch >= batches_per_epoch_)
        fail(ErrorCode::CorruptRecord, "batch index " + std::to_string(state.batch_in_epoch) + " is past the epoch");
    std::istringstream in(state.sampler_state);
    std::mt19937_64 sampler;
    in >> sampler;
    if (in.fail()) fail(ErrorCode::CorruptRecord, "unreadable sampler state");
    if (!velocity.empty() || !velocity_.empty()) {
        const auto& params = model_.params();
        if (velocity.size() != params.size())
            fail(ErrorCode::CorruptRecord, "momentum buffer count differs from the parameter count");
        for (std::size_t i = 0; i < params.size(); ++i)
            if (velocity[i].size() != params[i].numel())
                fail(ErrorCode::CorruptRecord, "momentum buffer size differs for " + params.name(i));
    }
    epoch_ = state.epoch;
    iteration_ = state.iteration;
    batch_in_epoch_ = state.batch_in_epoch;
    sampler_ = sampler;
    velocity_ = std::move(velocity);
    order_ = epoch_order(epoch_);
}

}  // namespace c2ft::train
