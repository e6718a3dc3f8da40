#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "c2ft/train/config.hpp"
#include "c2ft/train/trainer.hpp"
#include "c2ft/voxel/io.hpp"

namespace c2ft::train {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct TensorRecord {
    std::string name;
    ad::Shape shape;
    std::vector<float> values;

    friend bool operator==(const TensorRecord&, const TensorRecord&) = default;
};

struct Checkpoint {
    TrainConfig config;
    std::uint64_t model_hash = 0;
    TrainState state;
    std::vector<TensorRecord> params;
    std::vector<TensorRecord> velocity;  // empty unless momentum > 0
};

Checkpoint capture(const TrainModel& model, const TrainConfig& cfg, const TrainState& state = {});
Checkpoint capture(const Trainer& trainer);

// Binary layout, integers little-endian:
//   "C2FTCKPT" u32 version
//   header: u64 model hash, u32 len + config text, u64 epoch, u64 iteration,
//           u64 batch_in_epoch, u32 len + sampler text, u32 #params,
//           u32 #velocity
//   u32 crc32(header)
//   per record: u32 len + name, u32 rank, u64 dims[rank], f32 values,
//               u32 crc32(record)
vox::Bytes encode_checkpoint(const Checkpoint& ckpt);
// MalformedHeader on a bad magic, VersionMismatch on another version,
// CorruptRecord on a checksum failure, truncation, trailing bytes or a hash
// that disagrees with the stored config.
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies the parameters into `model`. ConfigHashMismatch when the model was
// built from a different config; CorruptRecord when names or shapes disagree.
void restore(TrainModel& model, const Checkpoint& ckpt);
// Parameters, momentum buffers and schedule position.
void restore(Trainer& trainer, const Checkpoint& ckpt);
// A model built from the stored config with the stored parameters.
TrainModel load_model(const Checkpoint& ckpt);

}  // namespace c2ft::train
