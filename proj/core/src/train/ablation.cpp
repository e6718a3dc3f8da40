#include "c2ft/train/ablation.hpp"

#include <cstdio>

#include "c2ft/error.hpp"
#include "c2ft/train/trainer.hpp"

namespace c2ft::train {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

}  // namespace

std::vector<AblationVariant> loss_variants(const TrainConfig& base) {
    std::vector<AblationVariant> out;
    for (const LossMode m : {LossMode::Mse, LossMode::Ssim, LossMode::Total}) {
        TrainConfig c = base;
        c.loss = m;
        out.push_back({std::string(loss_mode_name(m)), c});
    }
    return out;
}

std::vector<AblationVariant> refiner_variants(const TrainConfig& base) {
    TrainConfig full = base, wr = base;
    full.model.refiner_enabled = true;
    wr.model.refiner_enabled = false;
    return {{"full", full}, {"wr", wr}};
}

std::vector<AblationVariant> train_view_variants(const TrainConfig& base, std::span<const std::size_t> counts) {
    std::vector<AblationVariant> out;
    for (const std::size_t k : counts) {
        TrainConfig c = base;
        c.views_per_sample = k;
        out.push_back({"train" + std::to_string(k), c});
    }
    return out;
}

std::vector<AblationVariant> block_variants(const TrainConfig& base, std::span<const std::size_t> blocks) {
    std::vector<AblationVariant> out;
    for (const std::size_t j : blocks) {
        TrainConfig c = base;
        c.model.encoder_blocks = j;
        out.push_back({"J" + std::to_string(j), c});
    }
    return out;
}

std::vector<AblationRun> run_ablation(std::span<const AblationVariant> variants,
                                      std::span<const std::uint64_t> seeds, const data::Dataset& dataset,
                                      const EvalOptions& opts, const std::function<void(const AblationRun&)>& on_run) {
    std::vector<AblationRun> runs;
    for (const auto& v : variants) {
        for (const std::uint64_t seed : seeds) {
            TrainConfig cfg = v.config;
            cfg.seed = seed;
            Trainer trainer(cfg, dataset);
            const auto curve = trainer.run();
            ModelReconstructor recon(trainer.model());
            runs.push_back({v.name, seed, curve.empty() ? 0.0 : curve.back().loss, evaluate(recon, dataset, opts)});
            if (on_run) on_run(runs.back());
        }
    }
    return runs;
}

std::vector<double> ablation_ious(std::span<const AblationRun> runs, const std::string& variant, std::size_t column) {
    std::vector<double> out;
    for (const auto& r : runs)
        if (r.variant == variant) out.push_back(r.eval.at(column).overall.iou);
    return out;
}

std::string ablation_markdown(std::span<const AblationRun> runs) {
    if (runs.empty()) return {};
    std::string out = "| variant | seed | final loss |";
    std::string rule = "|---|---|---|";
    for (const auto& c : runs.front().eval) {
        out += " IoU@" + std::to_string(c.key) + " |";
        rule += "---|";
    }
    out += "\n" + rule + "\n";
    std::vector<std::string> order;
    for (const auto& r : runs) {
        out += "| " + r.variant + " | " + std::to_string(r.seed) + " | " + num(r.final_loss) + " |";
        for (const auto& c : r.eval) out += " " + num(c.overall.iou) + " |";
        out += "\n";
        if (order.empty() || order.back() != r.variant) order.push_back(r.variant);
    }
    for (const auto& name : order) {
        out += "| " + name + " | mean | |";
        for (std::size_t c = 0; c < runs.front().eval.size(); ++c) {
            const auto ious = ablation_ious(runs, name, c);
            double sum = 0.0;
            for (const double v : ious) sum += v;
            out += " " + num(sum / static_cast<double>(ious.size())) + " |";
        }
        out += "\n";
    }
    return out;
}

}  // namespace c2ft::train
