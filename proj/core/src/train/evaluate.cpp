#include "c2ft/train/evaluate.hpp"

#include <cstdio>
#include <functional>

#include "c2ft/error.hpp"

namespace c2ft::train {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

using ViewTransform = std::function<std::vector<data::ViewImage>(std::vector<data::ViewImage>)>;

EvalColumn score(Reconstructor& recon, const data::Dataset& dataset, const EvalOptions& opts, std::size_t key,
                 std::size_t k, const ViewTransform& transform) {
    const auto ids = dataset.manifest.indices(opts.split);
    if (ids.empty())
        fail(ErrorCode::TooFewObjects, "split '" + std::string(data::split_name(opts.split)) + "' is empty");
    if (k == 0) fail(ErrorCode::EmptyViewList, "view count 0");

    struct Sum {
        double iou = 0.0, fscore = 0.0;
        std::size_t n = 0;
    };
    Sum all;
    std::map<data::Category, Sum> per;
    for (const std::size_t id : ids) {
        const auto& views = dataset.views.at(id);
        if (views.size() < k)
            fail(ErrorCode::MissingViews, "object " + std::to_string(id) + " has " + std::to_string(views.size()) +
                                              " views, " + std::to_string(k) + " requested");
        std::vector<data::ViewImage> input(views.begin(), views.begin() + static_cast<std::ptrdiff_t>(k));
        if (transform) input = transform(std::move(input));
        const vox::VoxelGrid pred = recon.reconstruct(input, id);
        const vox::VoxelGrid& target = dataset.grids.at(id);

        const double iou = vox::metric_iou(target, pred, opts.threshold);
        double f = 0.0;
        try {
            f = vox::metric_fscore(target, pred, opts.threshold, opts.tau).fscore;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::EmptyVolume) throw;
        }
        for (Sum* s : {&all, &per[dataset.manifest.entries[id].category]}) {
            s->iou += iou;
            s->fscore += f;
            ++s->n;
        }
    }

    auto mean = [](const Sum& s) {
        const auto n = static_cast<double>(s.n);
        return MetricMean{s.iou / n, s.fscore / n, s.n};
    };
    EvalColumn col{key, mean(all), {}};
    for (const auto& [cat, s] : per) col.per_category[cat] = mean(s);
    return col;
}

}  // namespace

vox::VoxelGrid ModelReconstructor::reconstruct(std::span<const data::ViewImage> views, std::size_t) {
    ad::NoGradGuard no_grad;
    std::vector<std::size_t> all(views.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto out = model_->forward(data::stack_views<float>(views, all));
    const auto v = model_->config().volume_side;
    const auto d = out.volume.data();
    return vox::VoxelGrid(v, std::vector<double>(d.begin(), d.end()), vox::GridKind::Continuous);
}

std::vector<EvalColumn> evaluate(Reconstructor& recon, const data::Dataset& dataset, const EvalOptions& opts) {
    std::vector<EvalColumn> out;
    for (const std::size_t k : opts.view_counts) out.push_back(score(recon, dataset, opts, k, k, {}));
    return out;
}

std::vector<EvalColumn> occlusion_sweep(Reconstructor& recon, const data::Dataset& dataset,
                                        std::span<const std::size_t> sizes, const EvalOptions& opts,
                                        std::size_t views) {
    const std::size_t image = dataset.manifest.render.image_size;
    std::vector<EvalColumn> out;
    for (const std::size_t size : sizes) {
        const std::size_t box = data::scale_box(size, image);
        out.push_back(score(recon, dataset, opts, size, views, [box](std::vector<data::ViewImage> v) {
            return data::occlude(v, box);
        }));
    }
    return out;
}

std::string to_csv(std::span<const EvalColumn> columns, const std::string& key_name) {
    std::string out = key_name + ",category,objects,iou,fscore\n";
    auto row = [&](std::size_t key, std::string_view cat, const MetricMean& m) {
        out += std::to_string(key) + "," + std::string(cat) + "," + std::to_string(m.objects) + "," + num(m.iou) +
               "," + num(m.fscore) + "\n";
    };
    for (const auto& c : columns) {
        row(c.key, "all", c.overall);
        for (const auto& [cat, m] : c.per_category) row(c.key, data::category_name(cat), m);
    }
    return out;
}

std::string to_markdown(std::span<const EvalColumn> columns, const std::string& key_name) {
    std::string head = "| " + key_name + " |";
    std::string rule = "|---|";
    for (const auto& c : columns) {
        head += " " + std::to_string(c.key) + " |";
        rule += "---|";
    }
    std::string out = head + "\n" + rule + "\n";
    std::string iou = "| IoU |", fs = "| F-score |";
    for (const auto& c : columns) {
        iou += " " + num(c.overall.iou) + " |";
        fs += " " + num(c.overall.fscore) + " |";
    }
    out += iou + "\n" + fs + "\n";
    if (columns.empty()) return out;

    out += "\n| IoU by category |";
    for (const auto& c : columns) out += " " + std::to_string(c.key) + " |";
    out += "\n" + rule + "\n";
    for (const auto& [cat, _] : columns.front().per_category) {
        out += "| " + std::string(data::category_name(cat)) + " |";
        for (const auto& c : columns) {
            const auto it = c.per_category.find(cat);
            out += " " + (it == c.per_category.end() ? std::string("-") : num(it->second.iou)) + " |";
        }
        out += "\n";
    }
    return out;
}

}  // namespace c2ft::train
