#include <benchmark/benchmark.h>

#include <random>

#include "c2ft/autodiff/ops.hpp"
#include "c2ft/data/dataset.hpp"
#include "c2ft/data/objects.hpp"
#include "c2ft/data/render.hpp"
#include "c2ft/model/model.hpp"
#include "c2ft/train/config.hpp"
#include "c2ft/train/trainer.hpp"
#include "c2ft/voxel/cubes.hpp"
#include "c2ft/voxel/io.hpp"
#include "c2ft/voxel/losses.hpp"

namespace {

using namespace c2ft;

ad::Tensor<float> random_tensor(ad::Shape shape, std::uint32_t seed, bool grad = false) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<float> v(ad::shape_numel(shape));
    for (auto& x : v) x = u(rng);
    return ad::Tensor<float>::from(std::move(shape), std::move(v), grad);
}

void BM_Matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = random_tensor({n, n}, 1), b = random_tensor({n, n}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(ad::matmul(a, b).data().data());
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256)->Arg(768);

void BM_Conv2d(benchmark::State& state) {
    const auto x = random_tensor({8, 2, 32, 32}, 3);
    const auto w = random_tensor({8, 2, 3, 3}, 4);
    const auto b = random_tensor({8}, 5);
    for (auto _ : state) benchmark::DoNotOptimize(ad::conv2d(x, w, b, 2, 1).data().data());
}
BENCHMARK(BM_Conv2d);

model::ModelConfig preset(std::int64_t which) {
    return which == 0 ? model::ModelConfig::tiny() : model::ModelConfig::desk();
}

void BM_ModelForward(benchmark::State& state) {
    const auto cfg = preset(state.range(0));
    const model::Model<float> m(cfg, 1);
    const auto images = random_tensor({8, cfg.image_channels, cfg.image_size, cfg.image_size}, 6);
    ad::NoGradGuard no_grad;
    for (auto _ : state) benchmark::DoNotOptimize(m.forward(images).volume.data().data());
    state.SetLabel(state.range(0) == 0 ? "tiny" : "desk");
}
BENCHMARK(BM_ModelForward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TrainSample(benchmark::State& state) {
    auto tc = state.range(0) == 0 ? train::TrainConfig::tiny() : train::TrainConfig::desk();
    train::TrainModel m(tc.model, 1);
    const auto& cfg = tc.model;
    const train::Sample s{random_tensor({8, cfg.image_channels, cfg.image_size, cfg.image_size}, 7),
                          random_tensor({cfg.volume_side, cfg.volume_side, cfg.volume_side}, 8)};
    for (auto _ : state) {
        m.params().zero_grad();
        train::sample_loss(m, tc, s).backward();
    }
    state.SetLabel(state.range(0) == 0 ? "tiny" : "desk");
}
BENCHMARK(BM_TrainSample)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LossTotal(benchmark::State& state) {
    const auto v = static_cast<std::size_t>(state.range(0));
    const auto y = random_tensor({v, v, v}, 9);
    const auto p = random_tensor({v, v, v}, 10, true);
    for (auto _ : state) {
        auto l = vox::loss_total(y, p);
        l.backward();
        benchmark::DoNotOptimize(l.item());
    }
}
BENCHMARK(BM_LossTotal)->Arg(16)->Arg(32);

void BM_PartitionAssemble(benchmark::State& state) {
    const auto x = random_tensor({32, 32, 32}, 11);
    for (auto _ : state) {
        auto t = vox::partition_cubes(x, 32, 4);
        benchmark::DoNotOptimize(vox::assemble_cubes(t, 32, 4).data().data());
    }
}
BENCHMARK(BM_PartitionAssemble);

void BM_BinvoxRoundtrip(benchmark::State& state) {
    const auto grid = data::gen_object(data::Category::Chair, 3, 32).grid;
    for (auto _ : state) benchmark::DoNotOptimize(vox::read_binvox(vox::write_binvox(grid)).size());
}
BENCHMARK(BM_BinvoxRoundtrip);

void BM_RenderView(benchmark::State& state) {
    const auto grid = data::gen_object(data::Category::Table, 4, 32).grid;
    const auto poses = data::standard_poses();
    std::size_t i = 0;
    for (auto _ : state) benchmark::DoNotOptimize(data::render_view(grid, poses[i++ % poses.size()], 64).values.data());
}
BENCHMARK(BM_RenderView);

}  // namespace

BENCHMARK_MAIN();
