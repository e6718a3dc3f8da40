#include "c2ft/train/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>

#include "c2ft/error.hpp"

namespace c2ft::train {

namespace {

constexpr char kMagic[8] = {'C', '2', 'F', 'T', 'C', 'K', 'P', 'T'};

std::uint32_t crc(std::span<const std::uint8_t> bytes) {
    return static_cast<std::uint32_t>(
        crc32(crc32(0L, Z_NULL, 0), bytes.data(), static_cast<uInt>(bytes.size())));
}

class Writer {
   public:
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out.insert(out.end(), s.begin(), s.end());
    }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

    vox::Bytes out;
};

class Reader {
   public:
    explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

    std::span<const std::uint8_t> take(std::size_t n) {
        if (n > bytes_.size() - pos_) fail(ErrorCode::CorruptRecord, "checkpoint is truncated");
        const auto s = bytes_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint32_t u32() {
        const auto s = take(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(s[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const auto s = take(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(s[i]) << (8 * i);
        return v;
    }
    std::string str() {
        const auto s = take(u32());
        return {s.begin(), s.end()};
    }
    float f32() { return std::bit_cast<float>(u32()); }
    std::size_t pos() const { return pos_; }
    bool done() const { return pos_ == bytes_.size(); }
    std::span<const std::uint8_t> since(std::size_t start) const { return bytes_.subspan(start, pos_ - start); }

   private:
    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
};

std::vector<TensorRecord> records(const TrainModel& model) {
    std::vector<TensorRecord> out;
    const auto& params = model.params();
    for (std::size_t i = 0; i < params.size(); ++i) {
        const auto d = params[i].data();
        out.push_back({params.name(i), params[i].shape(), {d.begin(), d.end()}});
    }
    return out;
}

void write_record(Writer& w, const TensorRecord& r) {
    const std::size_t start = w.out.size();
    w.str(r.name);
    w.u32(static_cast<std::uint32_t>(r.shape.size()));
    for (const std::size_t d : r.shape) w.u64(d);
    for (const float v : r.values) w.f32(v);
    const std::uint32_t c = crc(std::span(w.out).subspan(start));
    w.u32(c);
}

TensorRecord read_record(Reader& r) {
    const std::size_t start = r.pos();
    TensorRecord rec;
    rec.name = r.str();
    const std::uint32_t rank = r.u32();
    if (rank > 8) fail(ErrorCode::CorruptRecord, "record '" + rec.name + "' has rank " + std::to_string(rank));
    std::size_t n = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
        const std::uint64_t d = r.u64();
        if (d == 0 || d > (std::uint64_t{1} << 32) || n > (std::size_t{1} << 40) / d)
            fail(ErrorCode::CorruptRecord, "record '" + rec.name + "' has an implausible shape");
        rec.shape.push_back(d);
        n *= d;
    }
    rec.values.resize(n);
    for (float& v : rec.values) v = r.f32();
    const std::uint32_t expect = crc(r.since(start));
    if (r.u32() != expect) fail(ErrorCode::CorruptRecord, "checksum mismatch in record '" + rec.name + "'");
    return rec;
}

void copy_into(TrainModel& model, const std::vector<TensorRecord>& recs) {
    auto& params = model.params();
    if (recs.size() != params.size())
        fail(ErrorCode::CorruptRecord, "checkpoint holds " + std::to_string(recs.size()) + " parameters, model has " +
                                           std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (recs[i].name != params.name(i) || recs[i].shape != params[i].shape())
            fail(ErrorCode::CorruptRecord, "parameter " + std::to_string(i) + " is '" + recs[i].name + "' " +
                                               ad::shape_str(recs[i].shape) + ", model expects '" + params.name(i) +
                                               "' " + ad::shape_str(params[i].shape()));
        auto dst = params[i].mutable_data();
        std::copy(recs[i].values.begin(), recs[i].values.end(), dst.begin());
    }
}

}  // namespace

Checkpoint capture(const TrainModel& model, const TrainConfig& cfg, const TrainState& state) {
    if (model.config().hash() != cfg.model.hash())
        fail(ErrorCode::ConfigHashMismatch, "model was not built from this config");
    return {cfg, cfg.model.hash(), state, records(model), {}};
}

Checkpoint capture(const Trainer& trainer) {
    Checkpoint c = capture(trainer.model(), trainer.config(), trainer.state());
    const auto& params = trainer.model().params();
    const auto& vel = trainer.velocity();
    for (std::size_t i = 0; i < vel.size(); ++i) c.velocity.push_back({params.name(i), params[i].shape(), vel[i]});
    return c;
}

vox::Bytes encode_checkpoint(const Checkpoint& ckpt) {
    Writer w;
    w.out.insert(w.out.end(), std::begin(kMagic), std::end(kMagic));
    w.u32(kCheckpointVersion);
    const std::size_t header = w.out.size();
    w.u64(ckpt.model_hash);
    w.str(ckpt.config.to_text());
    w.u64(ckpt.state.epoch);
    w.u64(ckpt.state.iteration);
    w.u64(ckpt.state.batch_in_epoch);
    w.str(ckpt.state.sampler_state);
    w.u32(static_cast<std::uint32_t>(ckpt.params.size()));
    w.u32(static_cast<std::uint32_t>(ckpt.velocity.size()));
    const std::uint32_t c = crc(std::span(w.out).subspan(header));
    w.u32(c);
    for (const auto& r : ckpt.params) write_record(w, r);
    for (const auto& r : ckpt.velocity) write_record(w, r);
    return std::move(w.out);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < sizeof kMagic || std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0)
        fail(ErrorCode::MalformedHeader, "not a checkpoint (bad magic)");
    Reader r(bytes);
    r.take(sizeof kMagic);
    const std::uint32_t version = r.u32();
    if (version != kCheckpointVersion)
        fail(ErrorCode::VersionMismatch, "checkpoint version " + std::to_string(version) + ", expected " +
                                             std::to_string(kCheckpointVersion));
    const std::size_t header = r.pos();
    Checkpoint ckpt;
    ckpt.model_hash = r.u64();
    const std::string config_text = r.str();
    ckpt.state.epoch = r.u64();
    ckpt.state.iteration = r.u64();
    ckpt.state.batch_in_epoch = r.u64();
    ckpt.state.sampler_state = r.str();
    const std::uint32_t n_params = r.u32();
    const std::uint32_t n_velocity = r.u32();
    const std::uint32_t expect = crc(r.since(header));
    if (r.u32() != expect) fail(ErrorCode::CorruptRecord, "checkpoint header checksum mismatch");

    try {
        ckpt.config = TrainConfig::from_text(config_text);
    } catch (const Error& e) {
        fail(ErrorCode::CorruptRecord, std::string("stored config is unreadable: ") + e.what());
    }
    if (ckpt.config.model.hash() != ckpt.model_hash)
        fail(ErrorCode::CorruptRecord, "stored config does not match the stored hash");
    for (std::uint32_t i = 0; i < n_params; ++i) ckpt.params.push_back(read_record(r));
    for (std::uint32_t i = 0; i < n_velocity; ++i) ckpt.velocity.push_back(read_record(r));
    if (!r.done()) fail(ErrorCode::CorruptRecord, "trailing bytes after the last record");
    return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
    vox::write_file(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(vox::read_file(path)); }

void restore(TrainModel& model, const Checkpoint& ckpt) {
    if (model.config().hash() != ckpt.model_hash)
        fail(ErrorCode::ConfigHashMismatch, "checkpoint was written for a different model config");
    copy_into(model, ckpt.params);
}

void restore(Trainer& trainer, const Checkpoint& ckpt) {
    restore(trainer.model(), ckpt);
    std::vector<std::vector<float>> velocity;
    for (const auto& r : ckpt.velocity) velocity.push_back(r.values);
    trainer.resume(ckpt.state, std::move(velocity));
}

TrainModel load_model(const Checkpoint& ckpt) {
    TrainModel model(ckpt.config.model, ckpt.config.seed);
    restore(model, ckpt);
    return model;
}

}  // namespace c2ft::train
