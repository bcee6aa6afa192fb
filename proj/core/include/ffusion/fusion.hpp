// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_FUSION_HPP
#define FFUSION_FUSION_HPP

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ffusion/geometry.hpp"
#include "ffusion/point_cloud.hpp"

namespace ffusion {

enum class OutputMode : std::uint8_t {
  FrustumOnly,  // union of the detection intersections
  FullScene,    // the whole LiDAR scan plus the added points
};

std::string_view to_string(OutputMode mode);

/// Thresholds swept in the detector experiments, in metres.
inline constexpr std::array<double, 5> kTauSweep{0.25, 0.5, 0.6, 0.7, 0.9};

/// Best per-class thresholds found in the detector experiments:
/// Car 0.6, Cyclist 0.9, Pedestrian 0.7.
std::map<ObjectClass, double> best_class_tau();

struct FusionConfig {
  double tau = 0.7;
  double near = 0.5;
  double far = 80.0;
  OutputMode output_mode = OutputMode::FrustumOnly;
  float added_intensity = 0.0f;
  /// When set, overrides tau for the listed classes.
  std::optional<std::map<ObjectClass, double>> per_class_tau;
  unsigned threads = 1;

  double tau_for(ObjectClass cls) const;
  /// Throws Error on tau < 0, near >= far, or intensity outside [0, 1].
  void validate() const;
};

struct DetectionPair {
  BBox2D left_box;
  BBox2D right_box;
  ObjectClass class_label = ObjectClass::Car;

  void validate() const;
};

/// How the sensors relate. The PL cloud is produced in the left camera
/// frame; fusion happens in the common frame reached by left_to_common.
struct SensorSetup {
  StereoRig rig;
  RigidTransform lidar_to_left;
  RigidTransform left_to_common;

  RigidTransform lidar_to_common() const { return left_to_common * lidar_to_left; }
};

struct DetectionReport {
  ObjectClass class_label = ObjectClass::Car;
  double tau = 0.0;
  std::size_t lidar_in_intersection = 0;
  std::size_t pl_in_intersection = 0;
  std::size_t pl_added = 0;
};

struct StageTimings {
  double transform_ms = 0.0;
  double extract_ms = 0.0;
  double fuse_ms = 0.0;
  double merge_ms = 0.0;
};

struct FusionReport {
  std::vector<DetectionReport> detections;
  std::size_t lidar_input = 0;
  std::size_t pl_input = 0;
  std::size_t lidar_output = 0;  // LiDAR points kept in the output
  std::size_t pl_added = 0;      // distinct PL points appended
  std::size_t output_points = 0;
  StageTimings timing;
};

struct Extraction {
  PointCloud cloud;
  std::vector<std::size_t> indices;  // into the source cloud, ascending
};

struct FusionResult {
  PointCloud cloud;  // LiDAR frame, source Fused
  FusionReport report;
  std::vector<std::size_t> lidar_indices;     // LiDAR points in the output
  std::vector<std::size_t> added_pl_indices;  // PL points appended, ascending
};

FrustumIntersection detection_intersection(const DetectionPair& pair, const SensorSetup& setup,
                                           const FusionConfig& config);

/// Points of a common-frame cloud inside the intersection, order preserved.
Extraction extract_intersection(const PointCloud& cloud, const FrustumIntersection& region,
                                unsigned threads = 1);
Extraction extract_intersection(const PointCloud& cloud, const DetectionPair& pair,
                                const SensorSetup& setup, const FusionConfig& config);

/// Indices into pl_in of the points whose nearest neighbour in lidar_in is at
/// least tau away. The reference set is lidar_in alone; accepted points are
/// never added to it.
std::vector<std::size_t> fuse_single(const PointCloud& lidar_in, const PointCloud& pl_in,
                                     double tau, unsigned threads = 1);

/// fuse_single without the index: every PL point scans all of lidar_in.
std::vector<std::size_t> fuse_single_brute_force(const PointCloud& lidar_in,
                                                 const PointCloud& pl_in, double tau);

/// Full per-frame pipeline over all detections. The LiDAR cloud must be in
/// its native frame; the PL cloud in the left camera frame or the LiDAR frame.
/// Output order: kept LiDAR points by ascending source index, then added PL
/// points by ascending source index.
FusionResult fuse_frame(const PointCloud& lidar, const PointCloud& pl,
                        std::span<const DetectionPair> detections, const SensorSetup& setup,
                        const FusionConfig& config);

}  // namespace ffusion

#endif  // FFUSION_FUSION_HPP
