#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "c2ft/model/config.hpp"

namespace c2ft::train {

enum class LossMode { Mse, Ssim, Total };

std::string_view loss_mode_name(LossMode m);
std::optional<LossMode> parse_loss_mode(std::string_view name);

struct TrainConfig {
    model::ModelConfig model;
    std::size_t batch_size = 8;
    std::size_t views_per_sample = 8;
    // Views are drawn from the first view_pool poses of each object.
    std::size_t view_pool = 24;
    double lr = 0.01;
    std::size_t lr_decay_epochs = 500;
    double lr_decay = 0.1;
    double lr_floor = 1e-4;
    // SGD momentum; 0 is plain SGD.
    double momentum = 0.0;
    // Rescales the batch gradient to this global L2 norm when it is larger;
    // 0 disables clipping.
    double clip_norm = 0.0;
    std::size_t epochs = 100;
    // Stops early after this many SGD steps when non-zero.
    std::size_t max_iterations = 0;
    std::uint64_t seed = 0;
    LossMode loss = LossMode::Total;
    // Weight of the same loss applied to the decoder output before refinement.
    double aux_weight = 0.0;

    static TrainConfig tiny();
    static TrainConfig desk();
    static TrainConfig full();
    // "tiny", "desk" or "full"; InvalidArgument otherwise.
    static TrainConfig preset(std::string_view name);

    // InvalidArgument on violated bounds, plus ModelConfig::validate().
    void validate() const;

    // max(lr_floor, lr * lr_decay^floor(epoch / lr_decay_epochs)).
    double lr_at(std::size_t epoch) const;

    // Flat key registry shared by config files and command-line flags. Model
    // fields use their ModelConfig names. InvalidArgument on an unknown key or
    // an unparsable value.
    void set(std::string_view key, std::string_view value);
    std::string get(std::string_view key) const;
    static const std::vector<std::string>& keys();

    // "key=value" per line in keys() order.
    std::string to_text() const;
    // Applies "key=value" lines onto this config. Blank lines and lines
    // starting with '#' are skipped. A "preset" key resets to that preset
    // and must come first.
    void apply_text(std::string_view text);
    static TrainConfig from_text(std::string_view text);

    friend bool operator==(const TrainConfig& a, const TrainConfig& b) { return a.to_text() == b.to_text(); }
};

}  // namespace c2ft::train
