// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_POINT_CLOUD_HPP
#define FFUSION_POINT_CLOUD_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ffusion/geometry.hpp"

namespace ffusion {

enum class CloudSource : std::uint8_t { Lidar, PseudoLidar, Fused };

std::string_view to_string(CloudSource source);

/// Ordered point list with an optional reflectance channel.
struct PointCloud {
  std::vector<Point3> points;
  std::optional<std::vector<float>> intensities;
  Frame frame = Frame::Lidar;
  CloudSource source = CloudSource::Lidar;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_intensity() const { return intensities.has_value(); }
  float intensity(std::size_t i) const { return intensities ? (*intensities)[i] : 0.0f; }

  void reserve(std::size_t n);
  void push_back(const Point3& p, float intensity);

  /// Throws Error if intensities and points disagree in length or a
  /// coordinate is not finite.
  void check_invariants() const;
};

/// Copies the points at the given indices, keeping the intensity channel.
PointCloud select(const PointCloud& cloud, std::span<const std::size_t> indices);

/// Maps every point by t and retags the cloud with the target frame.
PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t, Frame target);

}  // namespace ffusion

#endif  // FFUSION_POINT_CLOUD_HPP
