// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_SYNTH_HPP
#define FFUSION_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ffusion/fusion.hpp"
#include "ffusion/kitti_io.hpp"
#include "ffusion/pseudolidar.hpp"

namespace ffusion {

/// An object placed explicitly by the scene spec. Dimensions default to the
/// class's typical size.
struct PlacedObject {
  ObjectClass object_class = ObjectClass::Car;
  double x = 0.0;  // lateral offset, metres, camera frame
  double z = 20.0; // depth of the box centre, metres
  double rotation_y = 0.0;
  std::optional<Eigen::Vector3d> dimensions;  // h, w, l
};

/// Scene parameters. Text form is one `key = value` per line, `#` comments;
/// `object = <Class> <x> <z> <rotation_y> [h w l]` may repeat.
struct SceneSpec {
  ImageSize image = kDefaultImageSize;
  double focal = 721.5377;
  double c_u = 609.5593;
  double c_v = 172.854;
  double baseline = 0.54;
  double camera_height = 1.65;  // camera above the ground plane

  int lidar_rings = 64;
  double lidar_min_elevation_deg = -24.8;
  double lidar_max_elevation_deg = 2.0;
  double lidar_azimuth_step_deg = 0.08;
  double lidar_max_range = 100.0;
  double lidar_noise = 0.01;  // metres, along the ray

  int pl_stride = 2;               // only every n-th pixel row and column
  double pl_noise_k = 0.000625;    // depth sigma = k z^2
  double max_depth = 80.0;
  double height_clip = 1.0;

  double near = 0.5;
  double far = 80.0;

  int random_objects = 3;
  double object_min_depth = 8.0;
  double object_max_depth = 40.0;
  std::vector<PlacedObject> objects;
};

SceneSpec parse_scene_spec_text(std::string_view text, std::string_view origin = "scene spec");
SceneSpec parse_scene_spec(const std::filesystem::path& path);

struct SyntheticScene {
  std::uint64_t seed = 0;
  SceneSpec spec;
  Calibration calib;
  std::vector<Label3D> objects;  // ground-truth boxes, camera frame
  PointCloud lidar;              // LiDAR frame, ring structured
  DisparityMap disparity;        // left image, noisy
  PointCloud pl;                 // left camera frame, from `disparity`
  std::vector<DetectionPair> detections;

  SensorSetup setup() const { return SensorSetup{calib.rig, calib.lidar_to_left, {}}; }
};

/// Deterministic for a fixed (seed, spec). Throws Error when an explicit
/// object is not fully visible in both images or falls outside [near, far].
SyntheticScene generate_scene(std::uint64_t seed, const SceneSpec& spec);

/// Calibration of the simulated rig: P2 = P0 = K, P3 = P1 with the baseline
/// offset, identity R0, and a forward-left-up LiDAR near the camera.
CalibBundle synthetic_calib_bundle(const SceneSpec& spec = {});

/// Unstructured clouds sized for throughput measurements. Part of each cloud
/// clusters on the detected objects, the rest fills the view up to 70 m.
struct FusionWorkload {
  Calibration calib;
  PointCloud lidar;  // LiDAR frame
  PointCloud pl;     // left camera frame
  std::vector<DetectionPair> detections;

  SensorSetup setup() const { return SensorSetup{calib.rig, calib.lidar_to_left, {}}; }
};

FusionWorkload make_fusion_workload(std::uint64_t seed, std::size_t lidar_points,
                                    std::size_t pl_points, std::size_t detections,
                                    const SceneSpec& spec = {});

/// True when p lies in the oriented box grown by `margin` on every side.
bool point_in_box(const Point3& p, const Label3D& box, double margin = 0.0);

struct BoxDensity {
  std::size_t box_index = 0;
  std::string type;
  std::size_t count = 0;
  double volume = 0.0;               // m^3 of the unexpanded box
  double points_per_cubic_metre = 0.0;
};

/// Per-box point counts. Cloud and boxes must share a frame.
std::vector<BoxDensity> density_metrics(const PointCloud& cloud, std::span<const Label3D> boxes,
                                        double margin = 0.0);

}  // namespace ffusion

#endif  // FFUSION_SYNTH_HPP
