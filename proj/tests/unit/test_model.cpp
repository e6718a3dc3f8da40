#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "c2ft/autodiff/ops.hpp"
#include "c2ft/error.hpp"
#include "c2ft/model/model.hpp"
#include "c2ft/voxel/cubes.hpp"
#include "c2ft/voxel/losses.hpp"
#include "support/gradcheck.hpp"

namespace c2ft {
namespace {

using ad::Tensor;
using model::Model;
using model::ModelConfig;

template <class Fn>
void expect_error(ErrorCode code, Fn&& fn) {
    try {
        fn();
        FAIL() << "expected " << to_string(code);
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), code) << e.what();
    }
}

Tensor<double> random_views(const ModelConfig& cfg, std::size_t n, std::mt19937& rng) {
    return testing::random_tensor({n, cfg.image_channels, cfg.image_size, cfg.image_size}, rng, 0.0, 1.0, false);
}

// Rows of `x` [N, ...] reordered by `perm`.
Tensor<double> take_rows(const Tensor<double>& x, const std::vector<std::size_t>& perm) {
    std::vector<Tensor<double>> rows;
    for (auto i : perm) rows.push_back(ad::slice(x, 0, i, 1));
    return ad::concat(std::span<const Tensor<double>>(rows), 0);
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// Direct-loop convolution + GELU tower + pooling + linear, independent of
// im2col and BLAS.
std::vector<double> backbone_oracle(const Model<double>& m, const Tensor<double>& img) {
    const auto& store = m.params();
    const auto& cfg = m.config();
    std::size_t c = cfg.image_channels;
    std::size_t s = cfg.image_size;
    std::vector<double> x(img.data().begin(), img.data().begin() + static_cast<long>(c * s * s));
    for (int layer = 0; layer < 4; ++layer) {
        const auto& w = store[*store.find("encoder.backbone.conv" + std::to_string(layer) + ".weight")];
        const auto& b = store[*store.find("encoder.backbone.conv" + std::to_string(layer) + ".bias")];
        const std::size_t o = w.dim(0);
        const std::size_t so = s / 2;
        std::vector<double> y(o * so * so);
        for (std::size_t oc = 0; oc < o; ++oc)
            for (std::size_t i = 0; i < so; ++i)
                for (std::size_t j = 0; j < so; ++j) {
                    double acc = b.data()[oc];
                    for (std::size_t ic = 0; ic < c; ++ic)
                        for (std::size_t di = 0; di < 3; ++di)
                            for (std::size_t dj = 0; dj < 3; ++dj) {
                                const long ii = long(2 * i + di) - 1;
                                const long jj = long(2 * j + dj) - 1;
                                if (ii < 0 || jj < 0 || ii >= long(s) || jj >= long(s)) continue;
                                acc += w.data()[((oc * c + ic) * 3 + di) * 3 + dj] *
                                       x[(ic * s + std::size_t(ii)) * s + std::size_t(jj)];
                            }
                    y[(oc * so + i) * so + j] = 0.5 * acc * (1.0 + std::erf(acc / std::sqrt(2.0)));
                }
        x = std::move(y);
        c = o;
        s = so;
    }
    std::vector<double> features = x;
    if (!cfg.backbone_flatten) {
        features.assign(c, 0.0);
        for (std::size_t ch = 0; ch < c; ++ch) {
            for (std::size_t k = 0; k < s * s; ++k) features[ch] += x[ch * s * s + k];
            features[ch] /= double(s * s);
        }
    }
    const auto& pw = store[*store.find("encoder.backbone.proj.weight")];
    const auto& pb = store[*store.find("encoder.backbone.proj.bias")];
    std::vector<double> out(cfg.embed_dim);
    for (std::size_t k = 0; k < out.size(); ++k) {
        out[k] = pb.data()[k];
        for (std::size_t f = 0; f < features.size(); ++f) out[k] += features[f] * pw.data()[f * out.size() + k];
    }
    return out;
}

void randomize_biases(Model<double>& m, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-0.3, 0.3);
    for (std::size_t i = 0; i < m.params().size(); ++i) {
        if (!m.params().name(i).ends_with(".bias")) continue;
        for (auto& v : m.params()[i].mutable_data()) v = dist(rng);
    }
}

TEST(ModelConfig, WidthLaw) {
    EXPECT_EQ(ModelConfig::tiny().embedding_width(), 56u);
    EXPECT_EQ(ModelConfig::full().embedding_width(), 1344u);
    EXPECT_EQ(ModelConfig::full().decoder_tokens(), 512u);
    for (std::size_t j : {3u, 4u, 5u}) {
        auto cfg = ModelConfig::full();
        cfg.encoder_blocks = j;
        cfg.decoder_heads = 1;
        cfg.validate();
        std::size_t want = 0;
        for (std::size_t k = 0; k < j; ++k) want += 768 / (std::size_t{1} << k);
        EXPECT_EQ(cfg.embedding_width(), want);
    }
    auto odd = ModelConfig::tiny();
    odd.embed_dim = 36;
    odd.encoder_blocks = 4;
    expect_error(ErrorCode::OddWidth, [&] { odd.validate(); });
    auto cube = ModelConfig::tiny();
    cube.decoder_cube = 3;
    expect_error(ErrorCode::NonDivisibleCube, [&] { cube.validate(); });
    EXPECT_NE(ModelConfig::tiny().hash(), ModelConfig::desk().hash());
    EXPECT_EQ(ModelConfig::tiny().hash(), ModelConfig::tiny().hash());
}

TEST(Encoder, BackboneMatchesDirectLoopOracle) {
    std::mt19937 rng(21);
    for (const bool flatten : {true, false}) {
        auto c = ModelConfig::tiny();
        c.backbone_flatten = flatten;
        Model<double> m(c, 1);
        randomize_biases(m, rng);
        const auto& cfg = m.config();
        auto zero = Tensor<double>::zeros({1, cfg.image_channels, cfg.image_size, cfg.image_size});
        auto img = random_views(cfg, 1, rng);
        for (const auto& x : {zero, img}) {
            auto got = m.encoder().embed_views(m.params(), x);
            auto want = backbone_oracle(m, x);
            EXPECT_LT(max_abs_diff(got.data(), want), 1e-10) << "flatten " << flatten;
        }
    }
}

TEST(Encoder, EmbeddingIsDeterministicAndDifferentiable) {
    std::mt19937 rng(22);
    Model<double> m(ModelConfig::tiny(), 2);
    auto img = random_views(m.config(), 1, rng);
    auto a = m.encoder().embed_views(m.params(), img);
    auto b = m.encoder().embed_views(m.params(), img);
    EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));

    auto leaf = Tensor<double>::from(img.shape(), std::vector<double>(img.data().begin(), img.data().end()), true);
    auto res = testing::grad_check([&] { return ad::sum(m.encoder().embed_views(m.params(), leaf)); }, {leaf}, 1e-5,
                                   60);
    EXPECT_LT(res.max_rel_error, 1e-4);
    expect_error(ErrorCode::ShapeMismatch,
                 [&] { m.encoder().embed_views(m.params(), Tensor<double>::zeros({1, 2, 16, 16})); });
}

TEST(Encoder, BlockWidthsAndSingleView) {
    Model<double> m(ModelConfig::tiny(), 3);
    const auto& blocks = m.encoder().blocks();
    ASSERT_EQ(blocks.size(), 3u);
    EXPECT_EQ(blocks[0].width, 32u);
    EXPECT_EQ(blocks[1].width, 16u);
    EXPECT_EQ(blocks[2].width, 8u);
    EXPECT_FALSE(blocks[2].reduce.has_value());
    std::mt19937 rng(23);
    auto tok = testing::random_tensor({1, 32}, rng, -1, 1, false);
    auto out = m.encoder().c2f_block(m.params(), 0, tok);
    EXPECT_EQ(out.reduced.shape(), (ad::Shape{1, 16}));
    for (double v : out.reduced.data()) EXPECT_TRUE(std::isfinite(v));
    expect_error(ErrorCode::ShapeMismatch, [&] { m.encoder().c2f_block(m.params(), 1, tok); });
}

TEST(Encoder, WidthIndependentOfViewCount) {
    std::mt19937 rng(24);
    Model<double> m(ModelConfig::tiny(), 4);
    for (std::size_t n : {1u, 8u, 24u}) {
        auto f = m.encoder().encode(m.params(), random_views(m.config(), n, rng));
        EXPECT_EQ(f.shape(), (ad::Shape{n, 56}));
    }
    expect_error(ErrorCode::TooManyViews, [&] { m.encoder().encode(m.params(), random_views(m.config(), 25, rng)); });
}

TEST(Encoder, PermutationEquivariantWithoutPositions) {
    auto cfg = ModelConfig::tiny();
    cfg.positional_embeddings = false;
    Model<double> m(cfg, 5);
    std::mt19937 rng(25);
    auto views = random_views(cfg, 6, rng);
    auto base = m.encoder().encode(m.params(), views);
    std::vector<std::size_t> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t < 5; ++t) {
        std::shuffle(perm.begin(), perm.end(), rng);
        auto permuted = m.encoder().encode(m.params(), take_rows(views, perm));
        auto expected = take_rows(base, perm);
        EXPECT_LT(max_abs_diff(permuted.data(), expected.data()), 1e-5);
    }
}

TEST(Decoder, RangeShapeAndErrors) {
    std::mt19937 rng(26);
    Model<double> m(ModelConfig::tiny(), 6);
    auto f = m.encoder().encode(m.params(), random_views(m.config(), 3, rng));
    auto d = m.decoder().decode(m.params(), f);
    EXPECT_EQ(d.shape(), (ad::Shape{8, 8, 8}));
    for (double v : d.data()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
    EXPECT_EQ(m.decoder().tokens(), 64u);
    expect_error(ErrorCode::WidthMismatch,
                 [&] { m.decoder().decode(m.params(), Tensor<double>::zeros({2, 55})); });
    // A duplicated view is a legal input.
    std::vector<std::size_t> dup{0, 1, 2, 2};
    auto d2 = m.decoder().decode(m.params(), take_rows(f, dup));
    EXPECT_EQ(d2.shape(), d.shape());
}

TEST(Decoder, ViewOrderInvariantWithoutPositions) {
    auto cfg = ModelConfig::tiny();
    cfg.positional_embeddings = false;
    Model<double> m(cfg, 7);
    std::mt19937 rng(27);
    auto views = random_views(cfg, 5, rng);
    auto base = m.forward(views).coarse;
    std::vector<std::size_t> perm{4, 2, 0, 3, 1};
    auto other = m.forward(take_rows(views, perm)).coarse;
    EXPECT_LT(max_abs_diff(base.data(), other.data()), 1e-5);
}

TEST(Refiner, ShapeTokensAndRange) {
    std::mt19937 rng(28);
    Model<double> m(ModelConfig::tiny(), 8);
    model::ForwardTrace<double> trace;
    auto out = m.forward(random_views(m.config(), 2, rng), &trace);
    EXPECT_EQ(out.volume.shape(), (ad::Shape{8, 8, 8}));
    ASSERT_EQ(trace.refiner_tokens.size(), 2u);
    EXPECT_EQ(trace.refiner_tokens[0], (std::pair<std::size_t, std::size_t>{8, 64}));
    EXPECT_EQ(trace.refiner_tokens[1], (std::pair<std::size_t, std::size_t>{64, 8}));
    for (double v : out.volume.data()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(Refiner, ZeroOutputProjectionGivesHalf) {
    std::mt19937 rng(29);
    Model<double> m(ModelConfig::tiny(), 9);
    for (std::size_t i = 0; i < m.params().size(); ++i) {
        const auto& n = m.params().name(i);
        if (n.starts_with("refiner.") && (n.ends_with(".out.weight") || n.ends_with(".out.bias")))
            for (auto& v : m.params()[i].mutable_data()) v = 0.0;
    }
    auto out = m.forward(random_views(m.config(), 3, rng));
    for (double v : out.volume.data()) EXPECT_EQ(v, 0.5);
}

TEST(Refiner, PerturbingOneCubeChangesOnlyItsToken) {
    auto cfg = ModelConfig::tiny();
    cfg.refiner_layers = 1;
    Model<double> m(cfg, 10);
    auto& store = m.params();
    // Zero positions and the attention output projection: each token then
    // flows through its own MLP path only.
    for (std::size_t i = 0; i < store.size(); ++i) {
        const auto& n = store.name(i);
        if (n.starts_with("refiner.") && (n.ends_with(".pos") || n.find(".attn.o.") != std::string::npos))
            for (auto& v : store[i].mutable_data()) v = 0.0;
    }
    std::mt19937 rng(30);
    auto vol = testing::random_tensor({8, 8, 8}, rng, 0.0, 1.0, false);
    auto tokens = vox::partition_cubes(vol, 8, 4);
    auto base = m.refiner()->block_tokens(store, 0, tokens);
    std::vector<double> bumped(tokens.data().begin(), tokens.data().end());
    const std::size_t target = 5;
    for (std::size_t j = 0; j < 64; ++j) bumped[target * 64 + j] += 0.25;
    auto changed = m.refiner()->block_tokens(store, 0, Tensor<double>::from({8, 64}, bumped));
    for (std::size_t t = 0; t < 8; ++t) {
        double diff = 0.0;
        for (std::size_t j = 0; j < 64; ++j) diff = std::max(diff, std::abs(base.data()[t * 64 + j] - changed.data()[t * 64 + j]));
        if (t == target)
            EXPECT_GT(diff, 0.0);
        else
            EXPECT_EQ(diff, 0.0) << "token " << t;
    }
}

TEST(Model, DeterministicFromSeed) {
    std::mt19937 rng(31);
    Model<float> a(ModelConfig::tiny(), 42);
    Model<float> b(ModelConfig::tiny(), 42);
    ASSERT_EQ(a.params().size(), b.params().size());
    for (std::size_t i = 0; i < a.params().size(); ++i) {
        const auto x = a.params()[i].data();
        const auto y = b.params()[i].data();
        EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin())) << a.params().name(i);
    }
    std::uniform_real_distribution<float> dist(0.f, 1.f);
    std::vector<float> img(4 * 2 * 32 * 32);
    for (auto& v : img) v = dist(rng);
    auto views = Tensor<float>::from({4, 2, 32, 32}, img);
    auto ya = a.forward(views).volume;
    auto yb = b.forward(views).volume;
    EXPECT_TRUE(std::equal(ya.data().begin(), ya.data().end(), yb.data().begin()));
}

TEST(Model, GradientOfHMatchesFiniteDifferences) {
    std::mt19937 rng(32);
    Model<double> m(ModelConfig::tiny(), 11);
    auto views = random_views(m.config(), 3, rng);
    auto gt = Tensor<double>::from({8, 8, 8}, [&] {
        std::vector<double> v(512);
        std::bernoulli_distribution occ(0.3);
        for (auto& x : v) x = occ(rng) ? 1.0 : 0.0;
        return v;
    }());
    auto h = m.params()[m.decoder().queries()];
    auto res = testing::grad_check([&] { return vox::loss_total(gt, m.forward(views).volume); }, {h}, 1e-5, 80);
    EXPECT_LT(res.max_rel_error, 1e-4);
}

TEST(Model, EveryParameterGroupMatchesFiniteDifferences) {
    std::mt19937 rng(33);
    Model<double> m(ModelConfig::tiny(), 12);
    auto views = random_views(m.config(), 3, rng);
    std::vector<double> occ(512);
    std::bernoulli_distribution coin(0.3);
    for (auto& x : occ) x = coin(rng) ? 1.0 : 0.0;
    auto gt = Tensor<double>::from({8, 8, 8}, occ);
    auto res = testing::grad_check([&] { return vox::loss_total(gt, m.forward(views).volume); },
                                   m.params().tensors(), 1e-5, 3);
    EXPECT_EQ(res.checked, 3 * m.params().size());
    EXPECT_LT(res.max_rel_error, 1e-4);
}

}  // namespace
}  // namespace c2ft
