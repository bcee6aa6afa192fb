// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "ffusion/fusion.hpp"
#include "ffusion/synth.hpp"

namespace {

using namespace ffusion;

// 1.2e5 LiDAR points, 3e5 pseudo-LiDAR points, 10 detections.
const FusionWorkload& workload() {
  static const FusionWorkload w = make_fusion_workload(1, 120000, 300000, 10);
  return w;
}

void BM_FuseFrame(benchmark::State& state) {
  const FusionWorkload& w = workload();
  FusionConfig config;
  config.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) {
    const FusionResult r = fuse_frame(w.lidar, w.pl, w.detections, w.setup(), config);
    benchmark::DoNotOptimize(r.cloud.size());
  }
}
BENCHMARK(BM_FuseFrame)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_FuseSingleIndexed(benchmark::State& state) {
  const FusionWorkload& w = workload();
  const SensorSetup setup = w.setup();
  const FusionConfig config;
  const PointCloud lidar = transform_cloud(w.lidar, setup.lidar_to_common(), Frame::Common);
  const PointCloud pl = transform_cloud(w.pl, setup.left_to_common, Frame::Common);
  const Extraction l = extract_intersection(lidar, w.detections[0], setup, config);
  const Extraction p = extract_intersection(pl, w.detections[0], setup, config);
  for (auto _ : state) benchmark::DoNotOptimize(fuse_single(l.cloud, p.cloud, config.tau).size());
  state.counters["lidar_in"] = static_cast<double>(l.cloud.size());
  state.counters["pl_in"] = static_cast<double>(p.cloud.size());
}
BENCHMARK(BM_FuseSingleIndexed)->Unit(benchmark::kMillisecond);

void BM_FuseSingleBruteForce(benchmark::State& state) {
  const FusionWorkload& w = workload();
  const SensorSetup setup = w.setup();
  const FusionConfig config;
  const PointCloud lidar = transform_cloud(w.lidar, setup.lidar_to_common(), Frame::Common);
  const PointCloud pl = transform_cloud(w.pl, setup.left_to_common, Frame::Common);
  const Extraction l = extract_intersection(lidar, w.detections[0], setup, config);
  const Extraction p = extract_intersection(pl, w.detections[0], setup, config);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fuse_single_brute_force(l.cloud, p.cloud, config.tau).size());
  }
}
BENCHMARK(BM_FuseSingleBruteForce)->Unit(benchmark::kMillisecond)->Iterations(1);

void BM_ExtractIntersection(benchmark::State& state) {
  const FusionWorkload& w = workload();
  const SensorSetup setup = w.setup();
  const FusionConfig config;
  const PointCloud pl = transform_cloud(w.pl, setup.left_to_common, Frame::Common);
  const FrustumIntersection region = detection_intersection(w.detections[0], setup, config);
  for (auto _ : state) benchmark::DoNotOptimize(extract_intersection(pl, region).indices.size());
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pl.size()));
}
BENCHMARK(BM_ExtractIntersection)->Unit(benchmark::kMillisecond);

}  // namespace
