// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_KD_INDEX_HPP
#define FFUSION_KD_INDEX_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "ffusion/geometry.hpp"

namespace ffusion {

struct Nearest {
  std::size_t index = 0;  // into the array the index was built from
  double squared_distance = std::numeric_limits<double>::infinity();

  double distance() const { return std::sqrt(squared_distance); }
};

struct QueryStats {
  std::size_t nodes_visited = 0;
  std::size_t points_tested = 0;
};

/// Exact nearest-neighbour index over an immutable point array.
///
/// Balanced median splits on the axis of largest spread, leaves of at most
/// leaf_size points. Equidistant neighbours resolve to the lowest source
/// index. Queries are const and safe to run concurrently.
class KdIndex {
 public:
  static constexpr std::size_t kDefaultLeafSize = 16;

  KdIndex() = default;
  explicit KdIndex(std::span<const Point3> points, std::size_t leaf_size = kDefaultLeafSize);

  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  std::size_t node_count() const { return nodes_.size(); }

  /// std::nullopt for an empty index.
  std::optional<Nearest> nearest(const Point3& query, QueryStats* stats = nullptr) const;

  /// +infinity for an empty index.
  double min_squared_distance(const Point3& query) const;
  double min_distance(const Point3& query) const { return std::sqrt(min_squared_distance(query)); }

 private:
  struct Node {
    // Leaf: [begin, end) into points_. Inner: children and split plane.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    double split = 0.0;
    std::uint8_t axis = 0;

    bool leaf() const { return left < 0; }
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node, const Point3& q, Nearest& best, QueryStats* stats) const;

  std::vector<Point3> points_;        // reordered copy
  std::vector<std::size_t> source_;   // points_[i] came from input[source_[i]]
  std::vector<Node> nodes_;
  std::size_t leaf_size_ = kDefaultLeafSize;
};

/// Linear scan with the same tie rule as KdIndex.
std::optional<Nearest> brute_force_nearest(std::span<const Point3> points, const Point3& query);

}  // namespace ffusion

#endif  // FFUSION_KD_INDEX_HPP
