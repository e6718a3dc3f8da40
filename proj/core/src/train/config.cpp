#include "c2ft/train/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>

#include "c2ft/error.hpp"

namespace c2ft::train {

namespace {

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    fail(ErrorCode::InvalidArgument, "bad value '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

std::size_t to_size(std::string_view key, std::string_view s) {
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) bad_value(key, s);
    return v;
}

std::uint64_t to_u64(std::string_view key, std::string_view s) {
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty()) bad_value(key, s);
    return v;
}

double to_double(std::string_view key, std::string_view s) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size() || s.empty() || !std::isfinite(v)) bad_value(key, s);
    return v;
}

bool to_bool(std::string_view key, std::string_view s) {
    if (s == "1" || s == "true" || s == "on") return true;
    if (s == "0" || s == "false" || s == "off") return false;
    bad_value(key, s);
}

std::vector<std::size_t> to_list(std::string_view key, std::string_view s) {
    std::vector<std::size_t> out;
    while (true) {
        const auto comma = s.find(',');
        out.push_back(to_size(key, s.substr(0, comma)));
        if (comma == std::string_view::npos) break;
        s.remove_prefix(comma + 1);
    }
    return out;
}

std::string fmt(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

std::string fmt(const std::vector<std::size_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

struct Field {
    std::string name;
    std::function<std::string(const TrainConfig&)> get;
    std::function<void(TrainConfig&, std::string_view)> set;
};

template <class M>
Field size_field(std::string name, M member) {
    return {name, [member](const TrainConfig& c) { return std::to_string(std::invoke(member, c)); },
            [member, name](TrainConfig& c, std::string_view v) { std::invoke(member, c) = to_size(name, v); }};
}

template <class M>
Field double_field(std::string name, M member) {
    return {name, [member](const TrainConfig& c) { return fmt(std::invoke(member, c)); },
            [member, name](TrainConfig& c, std::string_view v) { std::invoke(member, c) = to_double(name, v); }};
}

template <class M>
Field bool_field(std::string name, M member) {
    return {name, [member](const TrainConfig& c) { return std::string(std::invoke(member, c) ? "1" : "0"); },
            [member, name](TrainConfig& c, std::string_view v) { std::invoke(member, c) = to_bool(name, v); }};
}

template <class M>
Field list_field(std::string name, M member) {
    return {name, [member](const TrainConfig& c) { return fmt(std::invoke(member, c)); },
            [member, name](TrainConfig& c, std::string_view v) { std::invoke(member, c) = to_list(name, v); }};
}

// Accessors into the nested model config.
#define C2FT_MODEL(field) [](auto& c) -> auto& { return c.model.field; }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(size_field("batch_size", &TrainConfig::batch_size));
        f.push_back(size_field("views_per_sample", &TrainConfig::views_per_sample));
        f.push_back(size_field("view_pool", &TrainConfig::view_pool));
        f.push_back(double_field("lr", &TrainConfig::lr));
        f.push_back(size_field("lr_decay_epochs", &TrainConfig::lr_decay_epochs));
        f.push_back(double_field("lr_decay", &TrainConfig::lr_decay));
        f.push_back(double_field("lr_floor", &TrainConfig::lr_floor));
        f.push_back(double_field("momentum", &TrainConfig::momentum));
        f.push_back(double_field("clip_norm", &TrainConfig::clip_norm));
        f.push_back(size_field("epochs", &TrainConfig::epochs));
        f.push_back(size_field("max_iterations", &TrainConfig::max_iterations));
        f.push_back({"seed", [](const TrainConfig& c) { return std::to_string(c.seed); },
                     [](TrainConfig& c, std::string_view v) { c.seed = to_u64("seed", v); }});
        f.push_back({"loss", [](const TrainConfig& c) { return std::string(loss_mode_name(c.loss)); },
                     [](TrainConfig& c, std::string_view v) {
                         const auto m = parse_loss_mode(v);
                         if (!m) bad_value("loss", v);
                         c.loss = *m;
                     }});
        f.push_back(double_field("aux_weight", &TrainConfig::aux_weight));

        f.push_back(size_field("volume_side", C2FT_MODEL(volume_side)));
        f.push_back(size_field("image_size", C2FT_MODEL(image_size)));
        f.push_back(size_field("image_channels", C2FT_MODEL(image_channels)));
        f.push_back(size_field("backbone_channels", C2FT_MODEL(backbone_channels)));
        f.push_back(bool_field("backbone_flatten", C2FT_MODEL(backbone_flatten)));
        f.push_back(size_field("embed_dim", C2FT_MODEL(embed_dim)));
        f.push_back(size_field("encoder_blocks", C2FT_MODEL(encoder_blocks)));
        f.push_back(size_field("encoder_layers", C2FT_MODEL(encoder_layers)));
        f.push_back(size_field("encoder_heads", C2FT_MODEL(encoder_heads)));
        f.push_back(size_field("mlp_ratio", C2FT_MODEL(mlp_ratio)));
        f.push_back(size_field("max_views", C2FT_MODEL(max_views)));
        f.push_back(bool_field("positional_embeddings", C2FT_MODEL(positional_embeddings)));
        f.push_back(size_field("decoder_cube", C2FT_MODEL(decoder_cube)));
        f.push_back(size_field("decoder_heads", C2FT_MODEL(decoder_heads)));
        f.push_back(bool_field("refiner_enabled", C2FT_MODEL(refiner_enabled)));
        f.push_back(list_field("refiner_cubes", C2FT_MODEL(refiner_cubes)));
        f.push_back(list_field("refiner_heads", C2FT_MODEL(refiner_heads)));
        f.push_back(size_field("refiner_layers", C2FT_MODEL(refiner_layers)));
        f.push_back(bool_field("refiner_residual", C2FT_MODEL(refiner_residual)));
        f.push_back(double_field("norm_eps", C2FT_MODEL(norm_eps)));
        return f;
    }();
    return table;
}

#undef C2FT_MODEL

const Field& field(std::string_view key) {
    for (const Field& f : fields())
        if (f.name == key) return f;
    fail(ErrorCode::InvalidArgument, "unknown config key '" + std::string(key) + "'");
}

}  // namespace

std::string_view loss_mode_name(LossMode m) {
    switch (m) {
        case LossMode::Mse: return "mse";
        case LossMode::Ssim: return "ssim";
        case LossMode::Total: return "total";
    }
    return "?";
}

std::optional<LossMode> parse_loss_mode(std::string_view name) {
    for (LossMode m : {LossMode::Mse, LossMode::Ssim, LossMode::Total})
        if (loss_mode_name(m) == name) return m;
    return std::nullopt;
}

TrainConfig TrainConfig::tiny() {
    TrainConfig c;
    c.model = model::ModelConfig::tiny();
    c.batch_size = 8;
    c.lr = 0.05;
    c.momentum = 0.9;
    c.clip_norm = 1.0;
    c.lr_decay_epochs = 5000;
    c.epochs = 100;
    return c;
}

TrainConfig TrainConfig::desk() {
    TrainConfig c;
    c.model = model::ModelConfig::desk();
    c.batch_size = 8;
    c.lr = 0.05;
    c.momentum = 0.9;
    c.clip_norm = 1.0;
    c.lr_decay_epochs = 120;
    c.epochs = 150;
    return c;
}

TrainConfig TrainConfig::full() {
    TrainConfig c;
    c.model = model::ModelConfig::full();
    c.batch_size = 32;
    c.lr_decay_epochs = 500;
    c.epochs = 1500;
    return c;
}

TrainConfig TrainConfig::preset(std::string_view name) {
    if (name == "tiny") return tiny();
    if (name == "desk") return desk();
    if (name == "full") return full();
    fail(ErrorCode::InvalidArgument, "unknown preset '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
    auto need = [](bool ok, const std::string& what) {
        if (!ok) fail(ErrorCode::InvalidArgument, "train config: " + what);
    };
    need(batch_size > 0, "batch_size must be positive");
    need(views_per_sample > 0, "views_per_sample must be positive");
    need(view_pool >= views_per_sample, "views_per_sample exceeds view_pool");
    need(view_pool <= 24, "view_pool exceeds the 24 rendered poses");
    need(views_per_sample <= model.max_views, "views_per_sample exceeds max_views");
    need(lr > 0.0, "lr must be positive");
    need(lr_floor > 0.0 && lr_floor <= lr, "lr_floor must lie in (0, lr]");
    need(lr_decay > 0.0 && lr_decay <= 1.0, "lr_decay must lie in (0, 1]");
    need(lr_decay_epochs > 0, "lr_decay_epochs must be positive");
    need(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
    need(clip_norm >= 0.0, "clip_norm must be non-negative");
    need(epochs > 0, "epochs must be positive");
    need(aux_weight >= 0.0, "aux_weight must be non-negative");
    model.validate();
}

double TrainConfig::lr_at(std::size_t epoch) const {
    const double steps = static_cast<double>(epoch / lr_decay_epochs);
    return std::max(lr_floor, lr * std::pow(lr_decay, steps));
}

void TrainConfig::set(std::string_view key, std::string_view value) { field(key).set(*this, trim(value)); }

std::string TrainConfig::get(std::string_view key) const { return field(key).get(*this); }

const std::vector<std::string>& TrainConfig::keys() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const Field& f : fields()) out.push_back(f.name);
        return out;
    }();
    return names;
}

std::string TrainConfig::to_text() const {
    std::string out;
    for (const Field& f : fields()) out += f.name + "=" + f.get(*this) + "\n";
    return out;
}

void TrainConfig::apply_text(std::string_view text) {
    bool first = true;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(ErrorCode::InvalidArgument, "config line " + std::to_string(line_no) + " has no '='");
        const std::string_view key = trim(line.substr(0, eq));
        const std::string_view value = trim(line.substr(eq + 1));
        if (key == "preset") {
            if (!first) fail(ErrorCode::InvalidArgument, "'preset' must be the first key");
            *this = preset(value);
        } else {
            set(key, value);
        }
        first = false;
    }
}

TrainConfig TrainConfig::from_text(std::string_view text) {
    TrainConfig c;
    c.apply_text(text);
    return c;
}

}  // namespace c2ft::train
