// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ffusion/kd_index.hpp"

namespace {

using ffusion::KdIndex;
using ffusion::Point3;

std::vector<Point3> uniform(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> c(-50.0, 50.0);
  std::vector<Point3> pts(n);
  for (Point3& p : pts) p = {c(rng), c(rng), c(rng)};
  return pts;
}

void BM_IndexBuild(benchmark::State& state) {
  const auto pts = uniform(static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) {
    KdIndex index(pts);
    benchmark::DoNotOptimize(index.node_count());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_IndexBuild)->RangeMultiplier(4)->Range(1 << 12, 1 << 18)->Unit(benchmark::kMillisecond);

void BM_IndexQuery(benchmark::State& state) {
  const auto pts = uniform(static_cast<std::size_t>(state.range(0)), 1);
  const auto queries = uniform(4096, 2);
  const KdIndex index(pts);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(index.min_squared_distance(queries[i++ & 4095]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_IndexQuery)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);

void BM_BruteForceQuery(benchmark::State& state) {
  const auto pts = uniform(static_cast<std::size_t>(state.range(0)), 1);
  const auto queries = uniform(4096, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ffusion::brute_force_nearest(pts, queries[i++ & 4095]));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_BruteForceQuery)->RangeMultiplier(4)->Range(1 << 12, 1 << 18);

}  // namespace
