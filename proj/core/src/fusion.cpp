// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include "ffusion/fusion.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "ffusion/error.hpp"
#include "ffusion/kd_index.hpp"
#include "ffusion/parallel.hpp"

namespace ffusion {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

}  // namespace

std::string_view to_string(OutputMode mode) {
  return mode == OutputMode::FrustumOnly ? "frustum" : "scene";
}

std::map<ObjectClass, double> best_class_tau() {
  return {{ObjectClass::Car, 0.6}, {ObjectClass::Cyclist, 0.9}, {ObjectClass::Pedestrian, 0.7}};
}

double FusionConfig::tau_for(ObjectClass cls) const {
  if (per_class_tau) {
    if (const auto it = per_class_tau->find(cls); it != per_class_tau->end()) return it->second;
  }
  return tau;
}

void FusionConfig::validate() const {
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw Error("tau must be a finite value >= 0");
  if (per_class_tau) {
    for (const auto& [cls, value] : *per_class_tau) {
      if (!(value >= 0.0) || !std::isfinite(value)) {
        throw Error("per-class tau for " + std::string(to_string(cls)) + " must be >= 0");
      }
    }
  }
  if (!(near > 0.0) || !(near < far) || !std::isfinite(far)) {
    throw Error("frustum clip planes need 0 < near < far");
  }
  if (!(added_intensity >= 0.0f && added_intensity <= 1.0f)) {
    throw Error("added intensity must lie in [0, 1]");
  }
}

void DetectionPair::validate() const {
  if (left_box.class_label != class_label || right_box.class_label != class_label) {
    throw Error("detection pair boxes disagree on the class label");
  }
}

FrustumIntersection detection_intersection(const DetectionPair& pair, const SensorSetup& setup,
                                           const FusionConfig& config) {
  pair.validate();
  return stereo_intersection(pair.left_box, pair.right_box, setup.rig, setup.left_to_common,
                             config.near, config.far, Frame::Common);
}

Extraction extract_intersection(const PointCloud& cloud, const FrustumIntersection& region,
                                unsigned threads) {
  std::vector<std::uint8_t> inside(cloud.size(), 0);
  parallel_for(cloud.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) inside[i] = region.contains(cloud.points[i]) ? 1 : 0;
  });
  Extraction out;
  for (std::size_t i = 0; i < inside.size(); ++i) {
    if (inside[i]) out.indices.push_back(i);
  }
  out.cloud = select(cloud, out.indices);
  return out;
}

Extraction extract_intersection(const PointCloud& cloud, const DetectionPair& pair,
                                const SensorSetup& setup, const FusionConfig& config) {
  return extract_intersection(cloud, detection_intersection(pair, setup, config), config.threads);
}

std::vector<std::size_t> fuse_single(const PointCloud& lidar_in, const PointCloud& pl_in,
                                     double tau, unsigned threads) {
  if (!(tau >= 0.0)) throw Error("tau must be >= 0");
  const KdIndex index(lidar_in.points);
  const double tau_sq = tau * tau;
  std::vector<std::uint8_t> accept(pl_in.size(), 0);
  parallel_for(pl_in.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      accept[i] = index.min_squared_distance(pl_in.points[i]) >= tau_sq ? 1 : 0;
    }
  });
  std::vector<std::size_t> added;
  for (std::size_t i = 0; i < accept.size(); ++i) {
    if (accept[i]) added.push_back(i);
  }
  return added;
}

std::vector<std::size_t> fuse_single_brute_force(const PointCloud& lidar_in,
                                                 const PointCloud& pl_in, double tau) {
  if (!(tau >= 0.0)) throw Error("tau must be >= 0");
  const double tau_sq = tau * tau;
  std::vector<std::size_t> added;
  for (std::size_t i = 0; i < pl_in.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const Point3& q : lidar_in.points) best = std::min(best, (pl_in.points[i] - q).squaredNorm());
    if (best >= tau_sq) added.push_back(i);
  }
  return added;
}

FusionResult fuse_frame(const PointCloud& lidar, const PointCloud& pl,
                        std::span<const DetectionPair> detections, const SensorSetup& setup,
                        const FusionConfig& config) {
  config.validate();
  if (lidar.frame != Frame::Lidar) throw Error("LiDAR cloud must be in the LiDAR frame");
  if (pl.frame != Frame::LeftCamera && pl.frame != Frame::Lidar) {
    throw Error("pseudo-LiDAR cloud must be in the left camera or LiDAR frame");
  }
  lidar.check_invariants();
  pl.check_invariants();
  for (const DetectionPair& pair : detections) pair.validate();

  FusionResult result;
  FusionReport& report = result.report;
  report.lidar_input = lidar.size();
  report.pl_input = pl.size();

  auto t = Clock::now();
  const RigidTransform lidar_to_common = setup.lidar_to_common();
  const RigidTransform pl_to_common =
      pl.frame == Frame::Lidar ? lidar_to_common : setup.left_to_common;
  const PointCloud lidar_common = transform_cloud(lidar, lidar_to_common, Frame::Common);
  const PointCloud pl_common = transform_cloud(pl, pl_to_common, Frame::Common);
  report.timing.transform_ms = elapsed_ms(t);

  std::vector<std::uint8_t> lidar_keep(lidar.size(), 0);
  std::vector<std::uint8_t> pl_added(pl.size(), 0);
  for (const DetectionPair& pair : detections) {
    t = Clock::now();
    const FrustumIntersection region = detection_intersection(pair, setup, config);
    const Extraction lidar_in = extract_intersection(lidar_common, region, config.threads);
    const Extraction pl_in = extract_intersection(pl_common, region, config.threads);
    report.timing.extract_ms += elapsed_ms(t);

    t = Clock::now();
    const double tau = config.tau_for(pair.class_label);
    const std::vector<std::size_t> added = fuse_single(lidar_in.cloud, pl_in.cloud, tau,
                                                       config.threads);
    report.timing.fuse_ms += elapsed_ms(t);

    for (std::size_t i : lidar_in.indices) lidar_keep[i] = 1;
    for (std::size_t k : added) pl_added[pl_in.indices[k]] = 1;
    report.detections.push_back(DetectionReport{pair.class_label, tau, lidar_in.indices.size(),
                                                pl_in.indices.size(), added.size()});
  }

  t = Clock::now();
  for (std::size_t i = 0; i < lidar.size(); ++i) {
    if (config.output_mode == OutputMode::FullScene || lidar_keep[i]) {
      result.lidar_indices.push_back(i);
    }
  }
  for (std::size_t i = 0; i < pl.size(); ++i) {
    if (pl_added[i]) result.added_pl_indices.push_back(i);
  }

  // LiDAR points are copied from the native cloud so they stay bit-exact.
  PointCloud& out = result.cloud;
  out.frame = Frame::Lidar;
  out.source = CloudSource::Fused;
  out.points.reserve(result.lidar_indices.size() + result.added_pl_indices.size());
  out.intensities.emplace();
  out.intensities->reserve(out.points.capacity());
  for (std::size_t i : result.lidar_indices) {
    out.points.push_back(lidar.points[i]);
    out.intensities->push_back(lidar.intensity(i));
  }
  const bool pl_native = pl.frame == Frame::Lidar;
  const RigidTransform left_to_lidar = setup.lidar_to_left.inverse();
  for (std::size_t i : result.added_pl_indices) {
    out.points.push_back(pl_native ? pl.points[i] : left_to_lidar.apply(pl.points[i]));
    out.intensities->push_back(config.added_intensity);
  }

  report.lidar_output = result.lidar_indices.size();
  report.pl_added = result.added_pl_indices.size();
  report.output_points = out.size();
  report.timing.merge_ms = elapsed_ms(t);
  return result;
}

}  // namespace ffusion
