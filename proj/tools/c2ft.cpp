// c2ft command-line driver. Every subcommand writes its outputs plus a
// manifest.json (config, seed, git describe, metrics) into --out.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "c2ft/data/dataset.hpp"
#include "c2ft/data/occlusion.hpp"
#include "c2ft/error.hpp"
#include "c2ft/train/ablation.hpp"
#include "c2ft/train/checkpoint.hpp"
#include "c2ft/train/config.hpp"
#include "c2ft/train/evaluate.hpp"
#include "c2ft/train/rollout.hpp"
#include "c2ft/train/trainer.hpp"
#include "c2ft/version.hpp"
#include "c2ft/voxel/io.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace c2ft;

namespace {

void write_text(const fs::path& path, const std::string& text) {
    vox::write_file(path, vox::Bytes(text.begin(), text.end()));
}

std::string read_text(const fs::path& path) {
    const auto bytes = vox::read_file(path);
    return {bytes.begin(), bytes.end()};
}

json config_json(const train::TrainConfig& cfg) {
    json j = json::object();
    for (const auto& key : train::TrainConfig::keys()) j[key] = cfg.get(key);
    return j;
}

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

// Written last, so its presence marks a completed run.
void write_manifest(const fs::path& out, const std::string& command, json config, std::uint64_t seed,
                    json metrics, json outputs) {
    json m;
    m["command"] = command;
    m["git_describe"] = std::string(git_describe());
    m["created"] = utc_now();
    m["seed"] = seed;
    m["config"] = std::move(config);
    m["metrics"] = std::move(metrics);
    m["outputs"] = std::move(outputs);
    write_text(out / "manifest.json", m.dump(2) + "\n");
}

json columns_json(const std::vector<train::EvalColumn>& cols, const std::string& key_name) {
    json arr = json::array();
    for (const auto& c : cols) {
        json per = json::object();
        for (const auto& [cat, m] : c.per_category)
            per[std::string(data::category_name(cat))] = {{"iou", m.iou}, {"fscore", m.fscore}, {"objects", m.objects}};
        arr.push_back({{key_name, c.key},
                       {"iou", c.overall.iou},
                       {"fscore", c.overall.fscore},
                       {"objects", c.overall.objects},
                       {"per_category", per}});
    }
    return arr;
}

data::Split split_option(const std::string& name) {
    const auto s = data::parse_split(name);
    if (!s) throw CLI::ValidationError("--split", "expected train, val or test");
    return *s;
}

// Shared by every subcommand that trains: --preset, --config, then one flag
// per TrainConfig key, applied in that order.
struct ConfigFlags {
    std::string preset = "tiny";
    std::string config_file;
    std::map<std::string, std::string> values;

    void attach(CLI::App* app) {
        app->add_option("--preset", preset, "tiny, desk or full")->capture_default_str();
        app->add_option("--config", config_file, "flat key=value file applied after the preset");
        for (const auto& key : train::TrainConfig::keys())
            app->add_option("--" + key, values[key], "override " + key);
    }

    train::TrainConfig resolve() const {
        train::TrainConfig cfg = train::TrainConfig::preset(preset);
        if (!config_file.empty()) cfg.apply_text(read_text(config_file));
        for (const auto& [key, value] : values)
            if (!value.empty()) cfg.set(key, value);
        cfg.validate();
        return cfg;
    }
};

// ---- synth ----

struct SynthArgs {
    fs::path out;
    std::size_t objects = 200;
    std::size_t volume_side = 16;
    std::size_t image_size = 32;
    double elevation = data::kDefaultElevation;
    std::uint64_t seed = 0;
    double train = 0.7, val = 0.1, test = 0.2;
};

int run_synth(const SynthArgs& a) {
    const data::RenderConfig render{a.volume_side, a.image_size, data::kPoseCount, a.elevation};
    const auto manifest = data::make_manifest(a.objects, render, {a.train, a.val, a.test}, a.seed);
    const auto ds = data::synthesize(manifest);
    data::save_dataset(ds, a.out);
    json cfg = {{"objects", a.objects}, {"volume_side", a.volume_side}, {"image_size", a.image_size},
                {"elevation", a.elevation}, {"ratios", {a.train, a.val, a.test}}};
    json metrics = {{"train", manifest.indices(data::Split::Train).size()},
                    {"val", manifest.indices(data::Split::Val).size()},
                    {"test", manifest.indices(data::Split::Test).size()}};
    write_manifest(a.out, "synth", cfg, a.seed, metrics, {"manifest.txt", "objects/", "views/"});
    std::printf("synthesized %zu objects into %s\n", a.objects, a.out.c_str());
    return 0;
}

// ---- train ----

struct TrainArgs {
    ConfigFlags config;
    fs::path data;
    fs::path out;
    std::string resume;
    std::size_t log_every = 50;
    std::size_t checkpoint_every = 0;
};

int run_train(const TrainArgs& a) {
    const train::TrainConfig cfg = a.config.resolve();
    const auto ds = data::load_dataset(a.data);
    fs::create_directories(a.out);
    write_text(a.out / "config.txt", cfg.to_text());

    train::Trainer trainer(cfg, ds);
    std::string curve_csv = "iteration,epoch,lr,loss\n";
    if (!a.resume.empty()) {
        train::restore(trainer, train::load_checkpoint(a.resume));
        if (fs::exists(a.out / "loss.csv")) curve_csv = read_text(a.out / "loss.csv");
    }
    const auto start = std::chrono::steady_clock::now();
    const fs::path ckpt_path = a.out / "checkpoint.c2ft";
    std::size_t steps = 0;
    double last = 0.0;
    trainer.run(SIZE_MAX, [&](const train::StepRecord& r) {
        char line[96];
        std::snprintf(line, sizeof line, "%zu,%zu,%.9g,%.9g\n", r.iteration, r.epoch, r.lr, r.loss);
        curve_csv += line;
        last = r.loss;
        ++steps;
        if (a.log_every && (r.iteration + 1) % a.log_every == 0)
            std::fprintf(stderr, "iter %zu epoch %zu lr %.3g loss %.5f\n", r.iteration + 1, r.epoch, r.lr, r.loss);
        if (a.checkpoint_every && (r.iteration + 1) % a.checkpoint_every == 0) {
            train::save_checkpoint(ckpt_path, train::capture(trainer));
            write_text(a.out / "loss.csv", curve_csv);
        }
    });
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    train::save_checkpoint(ckpt_path, train::capture(trainer));
    write_text(a.out / "loss.csv", curve_csv);

    const auto st = trainer.state();
    json metrics = {{"iterations", st.iteration}, {"epochs", st.epoch}, {"steps_this_run", steps},
                    {"final_loss", last}, {"seconds", seconds},
                    {"parameters", trainer.model().params().numel()}};
    write_manifest(a.out, "train", config_json(cfg), cfg.seed, metrics,
                   {"config.txt", "loss.csv", "checkpoint.c2ft"});
    std::printf("trained %zu iterations, final loss %.5f, %.1f s\n", st.iteration, last, seconds);
    return 0;
}

// ---- eval / occlusion ----

struct EvalArgs {
    fs::path data;
    fs::path checkpoint;
    fs::path out;
    std::vector<std::size_t> views{train::kViewCounts.begin(), train::kViewCounts.end()};
    std::vector<std::size_t> sizes{data::kOcclusionSizes.begin(), data::kOcclusionSizes.end()};
    bool baseline = false;
    double threshold = vox::kDefaultThreshold;
    double tau = 0.0;
    std::string split = "test";
};

train::EvalOptions eval_options(const EvalArgs& a) {
    train::EvalOptions o;
    o.view_counts = a.views;
    o.threshold = a.threshold;
    o.tau = a.tau;
    o.split = split_option(a.split);
    return o;
}

json eval_config(const EvalArgs& a, const train::Checkpoint& ckpt) {
    json j = config_json(ckpt.config);
    j["eval_split"] = a.split;
    j["eval_threshold"] = a.threshold;
    j["eval_tau"] = a.tau;
    j["checkpoint"] = a.checkpoint.string();
    j["data"] = a.data.string();
    return j;
}

int run_eval(const EvalArgs& a) {
    const auto ckpt = train::load_checkpoint(a.checkpoint);
    const auto model = train::load_model(ckpt);
    const auto ds = data::load_dataset(a.data);
    train::ModelReconstructor recon(model);
    const auto cols = train::evaluate(recon, ds, eval_options(a));
    fs::create_directories(a.out);
    write_text(a.out / "eval.csv", train::to_csv(cols, "views"));
    write_text(a.out / "eval.md", train::to_markdown(cols, "views"));
    write_manifest(a.out, "eval", eval_config(a, ckpt), ckpt.config.seed, {{"views", columns_json(cols, "views")}},
                   {"eval.csv", "eval.md"});
    std::cout << train::to_markdown(cols, "views");
    return 0;
}

int run_occlusion(const EvalArgs& a) {
    const auto ckpt = train::load_checkpoint(a.checkpoint);
    const auto model = train::load_model(ckpt);
    const auto ds = data::load_dataset(a.data);
    train::ModelReconstructor recon(model);
    std::vector<std::size_t> sizes = a.sizes;
    if (a.baseline) sizes.insert(sizes.begin(), 0);
    const auto cols = train::occlusion_sweep(recon, ds, sizes, eval_options(a));
    fs::create_directories(a.out);
    write_text(a.out / "occlusion.csv", train::to_csv(cols, "box"));
    write_text(a.out / "occlusion.md", train::to_markdown(cols, "box"));
    write_manifest(a.out, "occlusion", eval_config(a, ckpt), ckpt.config.seed,
                   {{"occlusion", columns_json(cols, "box")}}, {"occlusion.csv", "occlusion.md"});
    std::cout << train::to_markdown(cols, "box");
    return 0;
}

// ---- rollout ----

struct RolloutArgs {
    fs::path data;
    fs::path checkpoint;
    fs::path out;
    std::size_t object = 0;
    std::size_t views = 8;
    std::size_t cell = 16;
};

int run_rollout(const RolloutArgs& a) {
    const auto ckpt = train::load_checkpoint(a.checkpoint);
    const auto model = train::load_model(ckpt);
    const auto ds = data::load_dataset(a.data);
    if (a.object >= ds.views.size())
        fail(ErrorCode::InvalidArgument, "object " + std::to_string(a.object) + " is not in the dataset");
    std::vector<std::size_t> idx(a.views);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    const auto maps = train::rollout_model(model, data::stack_views<float>(ds.views[a.object], idx));

    json outputs = json::array();
    json sums = json::array();
    for (std::size_t b = 0; b < maps.size(); ++b) {
        const std::string stem = "block" + std::to_string(b + 1);
        vox::write_file(a.out / (stem + ".pgm"), train::heatmap_pgm(maps[b], a.cell));
        write_text(a.out / (stem + ".csv"), train::matrix_csv(maps[b]));
        outputs.push_back(stem + ".pgm");
        outputs.push_back(stem + ".csv");
        for (std::size_t v = 0; v < maps[b].rows; ++v) {
            const std::string name = stem + "_view" + std::to_string(v) + ".pgm";
            vox::write_file(a.out / name, train::heatmap_pgm(train::row_of(maps[b], v), a.cell));
            outputs.push_back(name);
        }
        double worst = 0.0;
        for (std::size_t r = 0; r < maps[b].rows; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < maps[b].cols; ++c) s += maps[b].at(r, c);
            worst = std::max(worst, std::abs(s - 1.0));
        }
        sums.push_back(worst);
    }
    json cfg = config_json(ckpt.config);
    cfg["object"] = a.object;
    cfg["views"] = a.views;
    write_manifest(a.out, "rollout", cfg, ckpt.config.seed, {{"max_row_sum_error", sums}}, outputs);
    std::printf("wrote %zu block rollouts to %s\n", maps.size(), a.out.c_str());
    return 0;
}

// ---- reconstruct ----

struct ReconstructArgs {
    fs::path checkpoint;
    fs::path views_dir;
    std::size_t count = 8;
    std::vector<std::string> sil;
    std::vector<std::string> depth;
    fs::path out;
    double threshold = vox::kDefaultThreshold;
};

data::ViewImage read_view(const fs::path& sil, const fs::path& depth) {
    std::size_t s0 = 0, s1 = 0;
    const auto a = data::read_pgm(vox::read_file(sil), s0);
    const auto b = data::read_pgm(vox::read_file(depth), s1);
    if (s0 != s1) fail(ErrorCode::SizeMismatch, sil.string() + " and " + depth.string() + " differ in size");
    data::ViewImage img = data::ViewImage::blank(s0, 2);
    std::copy(a.begin(), a.end(), img.values.begin());
    std::copy(b.begin(), b.end(), img.values.begin() + static_cast<std::ptrdiff_t>(s0 * s0));
    return img;
}

int run_reconstruct(const ReconstructArgs& a) {
    const auto ckpt = train::load_checkpoint(a.checkpoint);
    const auto model = train::load_model(ckpt);
    std::vector<data::ViewImage> views;
    if (!a.views_dir.empty()) {
        for (std::size_t p = 0; p < a.count; ++p) {
            const auto stem = a.views_dir / std::to_string(p);
            views.push_back(read_view(stem.string() + "_sil.pgm", stem.string() + "_depth.pgm"));
        }
    } else {
        if (a.sil.size() != a.depth.size())
            fail(ErrorCode::InvalidArgument, "give one --depth image per --sil image");
        for (std::size_t i = 0; i < a.sil.size(); ++i) views.push_back(read_view(a.sil[i], a.depth[i]));
    }
    if (views.empty()) fail(ErrorCode::EmptyViewList, "no input views");
    if (views.front().size != ckpt.config.model.image_size)
        fail(ErrorCode::SizeMismatch, "images are " + std::to_string(views.front().size) + " pixels, the model expects " +
                                          std::to_string(ckpt.config.model.image_size));
    train::ModelReconstructor recon(model);
    const auto grid = recon.reconstruct(views, 0).binarize(a.threshold);
    vox::write_file(a.out, vox::write_binvox(grid));
    json cfg = config_json(ckpt.config);
    cfg["threshold"] = a.threshold;
    cfg["views"] = views.size();
    const fs::path dir = a.out.has_parent_path() ? a.out.parent_path() : fs::path(".");
    write_manifest(dir, "reconstruct", cfg, ckpt.config.seed, {{"occupied", grid.occupied()}},
                   {a.out.filename().string()});
    std::printf("wrote %s (%zu occupied voxels)\n", a.out.c_str(), grid.occupied());
    return 0;
}

// ---- ablation ----

struct AblationArgs {
    ConfigFlags config;
    fs::path data;
    fs::path out;
    std::string kind = "loss";
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::vector<std::size_t> eval_views{8};
    std::vector<std::size_t> values;
};

int run_ablation_cmd(const AblationArgs& a) {
    const train::TrainConfig base = a.config.resolve();
    const auto ds = data::load_dataset(a.data);
    std::vector<train::AblationVariant> variants;
    if (a.kind == "loss") {
        variants = train::loss_variants(base);
    } else if (a.kind == "refiner") {
        variants = train::refiner_variants(base);
    } else if (a.kind == "views") {
        const std::vector<std::size_t> def{4, 8, 12};
        variants = train::train_view_variants(base, a.values.empty() ? def : a.values);
    } else if (a.kind == "blocks") {
        const std::vector<std::size_t> def{1, 2, 3, 4};
        variants = train::block_variants(base, a.values.empty() ? def : a.values);
    } else {
        fail(ErrorCode::InvalidArgument, "unknown ablation kind '" + a.kind + "'");
    }
    train::EvalOptions opts;
    opts.view_counts = a.eval_views;
    const auto runs = train::run_ablation(variants, a.seeds, ds, opts, [](const train::AblationRun& r) {
        std::fprintf(stderr, "%s seed %llu: iou %.4f\n", r.variant.c_str(), static_cast<unsigned long long>(r.seed),
                     r.eval.front().overall.iou);
    });
    fs::create_directories(a.out);
    const std::string md = train::ablation_markdown(runs);
    write_text(a.out / "ablation.md", md);
    json metrics = json::array();
    for (const auto& r : runs)
        metrics.push_back({{"variant", r.variant}, {"seed", r.seed}, {"final_loss", r.final_loss},
                           {"views", columns_json(r.eval, "views")}});
    json cfg = config_json(base);
    cfg["ablation"] = a.kind;
    write_manifest(a.out, "ablation", cfg, base.seed, {{"runs", metrics}}, {"ablation.md"});
    std::cout << md;
    return 0;
}

// ---- report ----

struct ReportArgs {
    std::vector<fs::path> runs;
    fs::path out;
};

int run_report(const ReportArgs& a) {
    std::ostringstream md;
    md << "# c2ft runs\n\n| run | command | git | seed | key metrics |\n|---|---|---|---|---|\n";
    std::ostringstream tables;
    for (const auto& dir : a.runs) {
        const json m = json::parse(read_text(dir / "manifest.json"));
        const std::string cmd = m.value("command", "?");
        std::string key;
        const json& met = m["metrics"];
        if (cmd == "train") {
            char buf[96];
            std::snprintf(buf, sizeof buf, "%zu iterations, final loss %.5f", met.value("iterations", std::size_t{0}),
                          met.value("final_loss", 0.0));
            key = buf;
        } else if (cmd == "eval" || cmd == "occlusion") {
            const std::string field = cmd == "eval" ? "views" : "occlusion";
            const std::string k = cmd == "eval" ? "views" : "box";
            for (const auto& c : met[field]) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%s%s %zu: IoU %.4f", key.empty() ? "" : "; ", k.c_str(),
                              c.value(k, std::size_t{0}), c.value("iou", 0.0));
                key += buf;
            }
            if (fs::exists(dir / (field == "views" ? "eval.md" : "occlusion.md")))
                tables << "## " << dir.string() << "\n\n"
                       << read_text(dir / (field == "views" ? "eval.md" : "occlusion.md")) << "\n";
        } else if (cmd == "ablation" && fs::exists(dir / "ablation.md")) {
            key = "see table";
            tables << "## " << dir.string() << "\n\n" << read_text(dir / "ablation.md") << "\n";
        } else {
            key = met.dump();
        }
        md << "| " << dir.string() << " | " << cmd << " | " << m.value("git_describe", "?") << " | "
           << m.value("seed", std::uint64_t{0}) << " | " << key << " |\n";
    }
    const std::string text = md.str() + "\n" + tables.str();
    if (a.out.empty()) {
        std::cout << text;
    } else {
        write_text(a.out, text);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"c2ft: coarse-to-fine multi-view voxel reconstruction"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(git_describe()));

    SynthArgs synth;
    auto* s = app.add_subcommand("synth", "build a procedural dataset");
    s->add_option("--out", synth.out, "dataset directory")->required();
    s->add_option("--objects", synth.objects)->capture_default_str();
    s->add_option("--volume_side", synth.volume_side)->capture_default_str();
    s->add_option("--image_size", synth.image_size)->capture_default_str();
    s->add_option("--elevation", synth.elevation)->capture_default_str();
    s->add_option("--seed", synth.seed)->capture_default_str();
    s->add_option("--train_ratio", synth.train)->capture_default_str();
    s->add_option("--val_ratio", synth.val)->capture_default_str();
    s->add_option("--test_ratio", synth.test)->capture_default_str();

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "train a model");
    tr.config.attach(t);
    t->add_option("--data", tr.data, "dataset directory")->required();
    t->add_option("--out", tr.out, "run directory")->required();
    t->add_option("--resume", tr.resume, "checkpoint to continue from");
    t->add_option("--log_every", tr.log_every)->capture_default_str();
    t->add_option("--checkpoint_every", tr.checkpoint_every, "0 saves only at the end")->capture_default_str();

    EvalArgs ev;
    auto add_eval = [&ev](CLI::App* c) {
        c->add_option("--data", ev.data)->required();
        c->add_option("--checkpoint", ev.checkpoint)->required();
        c->add_option("--out", ev.out)->required();
        c->add_option("--threshold", ev.threshold)->capture_default_str();
        c->add_option("--tau", ev.tau, "F-score distance; 0 selects one voxel pitch")->capture_default_str();
        c->add_option("--split", ev.split)->capture_default_str();
    };
    auto* e = app.add_subcommand("eval", "IoU and F-score per view count");
    add_eval(e);
    e->add_option("--views", ev.views)->delimiter(',')->capture_default_str();
    auto* o = app.add_subcommand("occlusion", "12-view evaluation under occlusion boxes");
    add_eval(o);
    o->add_option("--sizes", ev.sizes, "box sides at 224 pixels")->delimiter(',')->capture_default_str();
    o->add_flag("--baseline", ev.baseline, "also evaluate box size 0");

    RolloutArgs ro;
    auto* r = app.add_subcommand("rollout", "attention rollout heatmaps per encoder block");
    r->add_option("--data", ro.data)->required();
    r->add_option("--checkpoint", ro.checkpoint)->required();
    r->add_option("--out", ro.out)->required();
    r->add_option("--object", ro.object)->capture_default_str();
    r->add_option("--views", ro.views)->capture_default_str();
    r->add_option("--cell", ro.cell, "pixels per matrix entry")->capture_default_str();

    ReconstructArgs rc;
    auto* c = app.add_subcommand("reconstruct", "images to a binvox grid");
    c->add_option("--checkpoint", rc.checkpoint)->required();
    c->add_option("--views_dir", rc.views_dir, "directory with <pose>_sil.pgm and <pose>_depth.pgm");
    c->add_option("--count", rc.count, "poses read from --views_dir")->capture_default_str();
    c->add_option("--sil", rc.sil, "silhouette PGM (repeatable)");
    c->add_option("--depth", rc.depth, "depth PGM (repeatable)");
    c->add_option("--out", rc.out, "output .binvox")->required();
    c->add_option("--threshold", rc.threshold)->capture_default_str();

    AblationArgs ab;
    auto* a = app.add_subcommand("ablation", "train and evaluate a family of config variants");
    ab.config.attach(a);
    a->add_option("--data", ab.data)->required();
    a->add_option("--out", ab.out)->required();
    a->add_option("--kind", ab.kind, "loss, refiner, views or blocks")->capture_default_str();
    a->add_option("--seeds", ab.seeds)->delimiter(',')->capture_default_str();
    a->add_option("--eval_views", ab.eval_views)->delimiter(',')->capture_default_str();
    a->add_option("--values", ab.values, "view counts or block counts")->delimiter(',');

    ReportArgs rp;
    auto* p = app.add_subcommand("report", "summarise run directories into Markdown");
    p->add_option("runs", rp.runs, "run directories")->required();
    p->add_option("--out", rp.out, "Markdown file; stdout when omitted");

    CLI11_PARSE(app, argc, argv);
    try {
        if (s->parsed()) return run_synth(synth);
        if (t->parsed()) return run_train(tr);
        if (e->parsed()) return run_eval(ev);
        if (o->parsed()) return run_occlusion(ev);
        if (r->parsed()) return run_rollout(ro);
        if (c->parsed()) return run_reconstruct(rc);
        if (a->parsed()) return run_ablation_cmd(ab);
        if (p->parsed()) return run_report(rp);
    } catch (const Error& err) {
        std::fprintf(stderr, "c2ft: %s\n", err.what());
        return 2;
    } catch (const std::exception& err) {
        std::fprintf(stderr, "c2ft: %s\n", err.what());
        return 1;
    }
    return 0;
}
