// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include "ffusion/pseudolidar.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>

#include "ffusion/error.hpp"
#include "ffusion/parallel.hpp"

namespace ffusion {

DisparityMap::DisparityMap(int width, int height) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw Error("disparity map dimensions must be non-negative");
  const auto n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  values_.assign(n, 0.0);
  valid_.assign(n, 0);
}

void DisparityMap::set(int u, int v, double disparity) {
  values_[index(u, v)] = disparity;
  valid_[index(u, v)] = 1;
}

std::size_t DisparityMap::valid_count() const {
  return static_cast<std::size_t>(std::count(valid_.begin(), valid_.end(), 1));
}

PointCloud disparity_to_cloud(const DisparityMap& disparity, const StereoRig& rig,
                              const PseudoLidarOptions& options) {
  const CameraIntrinsics& cam = rig.left();
  if (disparity.size() != cam.image()) {
    throw Error("disparity map is " + std::to_string(disparity.width()) + "x" +
                std::to_string(disparity.height()) + " but the left camera image is " +
                std::to_string(cam.width()) + "x" + std::to_string(cam.height()));
  }
  if (!(options.max_depth > 0.0)) throw Error("max_depth must be positive");

  const double fb = cam.f_u() * rig.baseline();
  const auto rows = static_cast<std::size_t>(disparity.height());
  std::vector<std::vector<Point3>> per_row(rows);

  parallel_for(rows, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t row = begin; row < end; ++row) {
      const int v = static_cast<int>(row);
      std::vector<Point3>& out = per_row[row];
      for (int u = 0; u < disparity.width(); ++u) {
        if (!disparity.valid(u, v)) continue;
        const double d = disparity.value(u, v);
        if (!(d > 0.0) || !std::isfinite(d)) {
          throw Error("valid pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") has non-positive disparity (mask violation)");
        }
        const double z = fb / d;
        if (z > options.max_depth) continue;
        const double y = (v - cam.c_v()) * z / cam.f_v();
        if (y < -options.height_clip) continue;
        const double x = (u - cam.c_u()) * z / cam.f_u();
        out.emplace_back(x, y, z);
      }
    }
  });

  PointCloud cloud;
  cloud.frame = Frame::LeftCamera;
  cloud.source = CloudSource::PseudoLidar;
  std::size_t total = 0;
  for (const auto& row : per_row) total += row.size();
  cloud.points.reserve(total);
  for (auto& row : per_row) cloud.points.insert(cloud.points.end(), row.begin(), row.end());
  cloud.intensities.emplace(total, options.intensity);
  return cloud;
}

DisparityMap disparity_from_depth(int width, int height, std::span<const double> depth,
                                  const StereoRig& rig) {
  if (depth.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error("depth buffer size does not match " + std::to_string(width) + "x" +
                std::to_string(height));
  }
  DisparityMap out(width, height);
  const double fb = rig.left().f_u() * rig.baseline();
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const double z = depth[static_cast<std::size_t>(v) * width + u];
      if (z > 0.0 && std::isfinite(z)) out.set(u, v, fb / z);
    }
  }
  return out;
}

PointCloud sparsify_like_lidar(const PointCloud& cloud, const SparsifyOptions& options) {
  if (cloud.source != CloudSource::PseudoLidar) {
    throw Error("sparsify_like_lidar expects a pseudo-LiDAR cloud");
  }
  if (options.beams == 0) throw Error("beam count must be positive");
  if (!(options.azimuth_resolution_deg > 0.0)) throw Error("azimuth resolution must be positive");
  if (cloud.empty()) return cloud;

  // Camera frame: elevation is measured upwards, i.e. against +y.
  const auto n = cloud.size();
  std::vector<double> elevation(n);
  std::vector<double> azimuth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point3& p = cloud.points[i];
    elevation[i] = std::atan2(-p.y(), std::hypot(p.x(), p.z()));
    azimuth[i] = std::atan2(p.x(), p.z());
  }
  const auto [lo_it, hi_it] = std::minmax_element(elevation.begin(), elevation.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  const double spacing = options.beams > 1 ? (hi - lo) / (options.beams - 1) : 0.0;
  const double az_step = options.azimuth_resolution_deg * std::numbers::pi / 180.0;

  struct Best {
    std::size_t index;
    double error;
  };
  std::map<std::pair<long long, long long>, Best> cells;
  for (std::size_t i = 0; i < n; ++i) {
    long long beam = 0;
    double beam_elevation = options.beams > 1 ? lo : 0.5 * (lo + hi);
    if (spacing > 0.0) {
      beam = std::llround((elevation[i] - lo) / spacing);
      beam = std::clamp<long long>(beam, 0, options.beams - 1);
      beam_elevation = lo + static_cast<double>(beam) * spacing;
    }
    const auto az_bin = static_cast<long long>(std::floor(azimuth[i] / az_step));
    const double err = std::abs(elevation[i] - beam_elevation);
    auto [it, inserted] = cells.try_emplace({beam, az_bin}, Best{i, err});
    if (!inserted && err < it->second.error) it->second = Best{i, err};
  }

  std::vector<std::size_t> keep;
  keep.reserve(cells.size());
  for (const auto& [key, best] : cells) keep.push_back(best.index);
  std::sort(keep.begin(), keep.end());
  return select(cloud, keep);
}

}  // namespace ffusion
