// Copyright 2026 The molfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "molfield/fieldgen.hpp"
#include "molfield/kernels.hpp"
#include "molfield/molio.hpp"
#include "molfield/neuralfield.hpp"
#include "molfield/training.hpp"

namespace {

using namespace molfield;

const Molecule& octanol() {
  static const Molecule m = read_molecule_file(std::string(MOLFIELD_BENCH_DATA) + "/octanol.xyz");
  return m;
}

const ChannelSpec& two_channels() {
  static const ChannelSpec s = parse_channel_spec("heavy C,N,O,S\nhydrogen H\n");
  return s;
}

void BM_SampleGrid(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const GridSpec grid = auto_grid(octanol(), {n, n, n});
  for (auto _ : state) {
    VolumeGrid v = sample_grid(octanol(), two_channels(), grid);
    benchmark::DoNotOptimize(v.data.data());
  }
  state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_SampleGrid)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_Forward(benchmark::State& state) {
  const auto precision = state.range(1) ? Precision::kFloat32 : Precision::kFloat64;
  NetConfig cfg;
  cfg.out_dim = 2;
  const ModulatedField net = init_network(cfg, 0);
  LatentCode latent;
  latent.values.assign(cfg.latent_dim, 0.01);
  const int n = static_cast<int>(state.range(0));
  const auto points = normalize_points(auto_grid(octanol(), {n, n, n}));
  for (auto _ : state) {
    auto out = forward(net, latent, points, precision);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(points.size()));
}
BENCHMARK(BM_Forward)->Args({16, 0})->Args({16, 1})->Args({32, 0})->Args({32, 1})
    ->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  const auto volume = sample_grid(octanol(), two_channels(), auto_grid(octanol(), {32, 32, 32}));
  std::vector<VolumeGrid> volumes{volume};
  TrainConfig config;
  config.batch_voxels = static_cast<int>(state.range(0));
  config.steps = 1 << 30;
  NetConfig net;
  net.out_dim = 2;
  Trainer trainer(volumes, config, net);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(1024)->Arg(4096)->Unit(benchmark::kMillisecond);

template <class T>
void BM_Sincos(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<T> u(-60, 60);
  std::vector<T> x(n), s(n), c(n);
  for (auto& v : x) v = u(rng);
  for (auto _ : state) {
    kernels::sincos(x.data(), s.data(), c.data(), n);
    benchmark::DoNotOptimize(s.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_Sincos<double>)->Arg(4096);
BENCHMARK(BM_Sincos<float>)->Arg(4096);

// Baseline for the kernel above.
void BM_StdSincos(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-60, 60);
  std::vector<double> x(n), s(n), c(n);
  for (auto& v : x) v = u(rng);
  for (auto _ : state) {
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = std::sin(x[i]);
      c[i] = std::cos(x[i]);
    }
    benchmark::DoNotOptimize(s.data());
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_StdSincos)->Arg(4096);

}  // namespace
BENCHMARK_MAIN();
