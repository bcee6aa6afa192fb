// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_PSEUDOLIDAR_HPP
#define FFUSION_PSEUDOLIDAR_HPP

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "ffusion/geometry.hpp"
#include "ffusion/point_cloud.hpp"

namespace ffusion {

/// Dense per-pixel disparity in pixels with a validity mask. The mask is not
/// checked against the values here; disparity_to_cloud() rejects valid
/// pixels whose disparity is not strictly positive.
class DisparityMap {
 public:
  DisparityMap() = default;
  /// All pixels start invalid.
  DisparityMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  ImageSize size() const { return {width_, height_}; }

  double value(int u, int v) const { return values_[index(u, v)]; }
  bool valid(int u, int v) const { return valid_[index(u, v)] != 0; }

  /// Stores the disparity and marks the pixel valid.
  void set(int u, int v, double disparity);
  void set_valid(int u, int v, bool valid) { valid_[index(u, v)] = valid ? 1 : 0; }
  void invalidate(int u, int v) { set_valid(u, v, false); }

  std::size_t valid_count() const;

  std::span<const double> values() const { return values_; }

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
};

struct PseudoLidarOptions {
  double max_depth = 80.0;
  /// Points more than this many metres above the camera (y < -height_clip in
  /// the camera frame) are dropped. Infinity disables the clip.
  double height_clip = 1.0;
  /// Constant reflectance written for every generated point.
  float intensity = 0.0f;
  unsigned threads = 1;
};

/// Back-projects every valid pixel: z = f_u b / Y, x = (u - c_u) z / f_u,
/// y = (v - c_v) z / f_v. Output is row-major in the left camera frame.
PointCloud disparity_to_cloud(const DisparityMap& disparity, const StereoRig& rig,
                              const PseudoLidarOptions& options = {});

/// Depth to pseudo-disparity, Y = f_u b / z. Non-positive or non-finite
/// depths become invalid pixels.
DisparityMap disparity_from_depth(int width, int height, std::span<const double> depth,
                                  const StereoRig& rig);

struct SparsifyOptions {
  unsigned beams = 64;
  double azimuth_resolution_deg = 0.08;
};

/// Keeps at most one point per (beam, azimuth step) cell, the one whose
/// elevation is closest to the beam's elevation. Beams are spaced uniformly
/// across the cloud's elevation range. Only for baseline comparisons; the
/// fusion pipeline consumes the dense cloud.
PointCloud sparsify_like_lidar(const PointCloud& cloud, const SparsifyOptions& options = {});

}  // namespace ffusion

#endif  // FFUSION_PSEUDOLIDAR_HPP
