// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include "ffusion/kd_index.hpp"

#include <algorithm>
#include <numeric>

#include "ffusion/error.hpp"

namespace ffusion {

namespace {

inline double squared(const Point3& a, const Point3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

inline void offer(Nearest& best, double d2, std::size_t index) {
  if (d2 < best.squared_distance || (d2 == best.squared_distance && index < best.index)) {
    best.squared_distance = d2;
    best.index = index;
  }
}

}  // namespace

KdIndex::KdIndex(std::span<const Point3> points, std::size_t leaf_size)
    : leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (points.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw Error("KdIndex supports fewer than 2^32 points");
  }
  if (points.empty()) return;
  points_.assign(points.begin(), points.end());
  source_.resize(points.size());
  std::iota(source_.begin(), source_.end(), std::size_t{0});
  nodes_.reserve(2 * (points.size() / leaf_size_ + 1));
  build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdIndex::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= leaf_size_) return id;

  Eigen::Vector3d lo = points_[begin];
  Eigen::Vector3d hi = points_[begin];
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[i]);
    hi = hi.cwiseMax(points_[i]);
  }
  Eigen::Index axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  // Permute points_ and source_ together through an index order; the
  // (coordinate, source index) key makes the split independent of the
  // nth_element implementation's handling of equal keys.
  const std::uint32_t mid = begin + (end - begin) / 2;
  std::vector<std::uint32_t> order(end - begin);
  std::iota(order.begin(), order.end(), begin);
  const auto key_less = [&](std::uint32_t a, std::uint32_t b) {
    const double ca = points_[a][axis];
    const double cb = points_[b][axis];
    return ca < cb || (ca == cb && source_[a] < source_[b]);
  };
  std::nth_element(order.begin(), order.begin() + (mid - begin), order.end(), key_less);
  std::vector<Point3> pts(order.size());
  std::vector<std::size_t> src(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    pts[k] = points_[order[k]];
    src[k] = source_[order[k]];
  }
  std::copy(pts.begin(), pts.end(), points_.begin() + begin);
  std::copy(src.begin(), src.end(), source_.begin() + begin);

  const double split = points_[mid][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[static_cast<std::size_t>(id)];
  node.left = left;
  node.right = right;
  node.split = split;
  node.axis = static_cast<std::uint8_t>(axis);
  return id;
}

void KdIndex::search(std::int32_t id, const Point3& q, Nearest& best, QueryStats* stats) const {
  const Node& node = nodes_[static_cast<std::size_t>(id)];
  if (stats) ++stats->nodes_visited;
  if (node.leaf()) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      offer(best, squared(points_[i], q), source_[i]);
    }
    if (stats) stats->points_tested += node.end - node.begin;
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double diff = q[node.axis] - node.split;
  const std::int32_t first = diff < 0.0 ? node.left : node.right;
  const std::int32_t second = diff < 0.0 ? node.right : node.left;
  search(first, q, best, stats);
  // <= so that equidistant points with a lower source index are still seen.
  if (diff * diff <= best.squared_distance) search(second, q, best, stats);
}

std::optional<Nearest> KdIndex::nearest(const Point3& query, QueryStats* stats) const {
  if (nodes_.empty()) return std::nullopt;
  Nearest best;
  search(0, query, best, stats);
  return best;
}

double KdIndex::min_squared_distance(const Point3& query) const {
  const auto best = nearest(query);
  return best ? best->squared_distance : std::numeric_limits<double>::infinity();
}

std::optional<Nearest> brute_force_nearest(std::span<const Point3> points,
                                           const Point3& query) {
  if (points.empty()) return std::nullopt;
  Nearest best;
  for (std::size_t i = 0; i < points.size(); ++i) offer(best, squared(points[i], query), i);
  return best;
}

}  // namespace ffusion
