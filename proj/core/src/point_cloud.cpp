// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include "ffusion/point_cloud.hpp"

#include <string>

#include "ffusion/error.hpp"

namespace ffusion {

std::string_view to_string(CloudSource source) {
  switch (source) {
    case CloudSource::Lidar: return "lidar";
    case CloudSource::PseudoLidar: return "pseudo_lidar";
    case CloudSource::Fused: return "fused";
  }
  return "unknown";
}

void PointCloud::reserve(std::size_t n) {
  points.reserve(n);
  if (intensities) intensities->reserve(n);
}

void PointCloud::push_back(const Point3& p, float value) {
  if (!intensities) intensities.emplace(points.size(), 0.0f);
  points.push_back(p);
  intensities->push_back(value);
}

void PointCloud::check_invariants() const {
  if (intensities && intensities->size() != points.size()) {
    throw Error("point cloud has " + std::to_string(points.size()) + " points but " +
                std::to_string(intensities->size()) + " intensities");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].allFinite()) {
      throw Error("point " + std::to_string(i) + " has non-finite coordinates");
    }
  }
}

PointCloud select(const PointCloud& cloud, std::span<const std::size_t> indices) {
  PointCloud out;
  out.frame = cloud.frame;
  out.source = cloud.source;
  out.points.reserve(indices.size());
  for (std::size_t i : indices) out.points.push_back(cloud.points[i]);
  if (cloud.intensities) {
    out.intensities.emplace();
    out.intensities->reserve(indices.size());
    for (std::size_t i : indices) out.intensities->push_back((*cloud.intensities)[i]);
  }
  return out;
}

PointCloud transform_cloud(const PointCloud& cloud, const RigidTransform& t, Frame target) {
  PointCloud out;
  out.frame = target;
  out.source = cloud.source;
  out.intensities = cloud.intensities;
  out.points.reserve(cloud.size());
  for (const Point3& p : cloud.points) out.points.push_back(t.apply(p));
  return out;
}

}  // namespace ffusion
