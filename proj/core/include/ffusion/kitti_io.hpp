// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_KITTI_IO_HPP
#define FFUSION_KITTI_IO_HPP

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ffusion/fusion.hpp"
#include "ffusion/geometry.hpp"
#include "ffusion/point_cloud.hpp"

namespace ffusion {

/// Image size assumed when a calibration file is read without one.
inline constexpr ImageSize kDefaultImageSize{1242, 375};

/// Boxes whose visible area is below this many square pixels are discarded.
inline constexpr double kMinBoxArea = 100.0;

using Matrix34 = Eigen::Matrix<double, 3, 4, Eigen::RowMajor>;

/// Raw matrices of an object-benchmark calibration file.
struct CalibBundle {
  std::array<Matrix34, 4> P;  // P0..P3, rectified projections
  Eigen::Matrix3d R0 = Eigen::Matrix3d::Identity();
  Matrix34 Tr = Matrix34::Zero();  // LiDAR to reference camera
};

/// Calibration decoded into the pieces the pipeline needs.
struct Calibration {
  CalibBundle raw;
  StereoRig rig;
  /// LiDAR frame to the rectified left colour camera (camera 2).
  RigidTransform lidar_to_left;
};

/// One scan record: four little-endian float32 (x, y, z, reflectance).
inline constexpr std::size_t kScanRecordBytes = 16;

PointCloud read_velodyne_bin(const std::filesystem::path& path);
/// Inverse of read_velodyne_bin; points without intensity write 0.
void write_velodyne_bin(const PointCloud& cloud, const std::filesystem::path& path);

/// "KEY: v1 v2 ..." lines. Needs P2, P3, R0_rect and Tr_velo_to_cam.
CalibBundle parse_calib_bundle(std::string_view text, std::string_view origin = "calib");
CalibBundle read_calib_bundle(const std::filesystem::path& path);
Calibration make_calibration(const CalibBundle& bundle, ImageSize image = kDefaultImageSize);
Calibration parse_calib(const std::filesystem::path& path, ImageSize image = kDefaultImageSize);
std::string format_calib(const CalibBundle& bundle);
void write_calib(const CalibBundle& bundle, const std::filesystem::path& path);

struct PixelRect {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;
};

/// One object annotation line.
struct Label3D {
  std::string type;
  std::optional<ObjectClass> object_class;  // empty for classes we never fuse
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  PixelRect left_box;
  double height = 0.0;  // h, w, l in metres
  double width = 0.0;
  double length = 0.0;
  Eigen::Vector3d location = Eigen::Vector3d::Zero();  // bottom centre, camera frame
  double rotation_y = 0.0;
  std::optional<double> score;

  bool ignorable() const { return !object_class.has_value(); }
  /// Left-image box tagged with the object class; requires !ignorable().
  BBox2D left_bbox() const;
};

std::vector<Label3D> parse_labels_text(std::string_view text, std::string_view origin = "labels");
std::vector<Label3D> parse_labels(const std::filesystem::path& path);
std::string format_labels(std::span<const Label3D> labels);
void write_labels(std::span<const Label3D> labels, const std::filesystem::path& path);

/// The eight corners of the 3D box in the camera frame.
std::array<Eigen::Vector3d, 8> box_corners(const Label3D& label);

/// Axis-aligned hull of the corners projected through a 3x4 camera matrix,
/// not clamped. Throws GeometryError when any corner is not in front of the
/// camera.
PixelRect project_box_hull(const Label3D& label, const Matrix34& projection);

/// Right-image box from the 3D annotation, projected through P3 and clamped.
/// Throws GeometryError when the box is behind the camera or smaller than
/// kMinBoxArea after clamping.
BBox2D derive_right_bbox(const Label3D& label, const CalibBundle& calib,
                         ImageSize image = kDefaultImageSize);

/// Stereo detection pairs for every fusable label. Labels that cannot be
/// turned into a valid pair are skipped and described in `skipped`.
std::vector<DetectionPair> detections_from_labels(std::span<const Label3D> labels,
                                                  const Calibration& calib,
                                                  std::vector<std::string>* skipped = nullptr);

}  // namespace ffusion

#endif  // FFUSION_KITTI_IO_HPP
