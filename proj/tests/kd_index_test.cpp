// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <random>
#include <thread>

#include <gtest/gtest.h>

#include "ffusion/kd_index.hpp"
#include "support/oracles.hpp"

namespace ffusion {
namespace {

std::vector<Point3> random_points(std::size_t n, std::uint64_t seed, double extent = 50.0) {
  std::mt19937_64 rng(seed);
  std::vector<Point3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    pts.push_back(oracle::uniform_point(rng, Point3::Constant(-extent), Point3::Constant(extent)));
  }
  return pts;
}

TEST(KdIndex, EmptyIndexReturnsInfinity) {
  const KdIndex index(std::span<const Point3>{});
  EXPECT_TRUE(index.empty());
  EXPECT_FALSE(index.nearest({1, 2, 3}).has_value());
  EXPECT_TRUE(std::isinf(index.min_distance({1, 2, 3})));
  EXPECT_TRUE(std::isinf(KdIndex().min_squared_distance({0, 0, 0})));
}

TEST(KdIndex, SinglePoint) {
  const std::vector<Point3> pts{{0, 0, 0}};
  const KdIndex index(pts);
  EXPECT_EQ(index.min_distance({3, 4, 0}), 5.0);
  EXPECT_EQ(index.min_squared_distance({3, 4, 0}), 25.0);
  EXPECT_EQ(index.nearest({3, 4, 0})->index, 0u);
}

TEST(KdIndex, SizeAndSelfQueries) {
  const std::vector<Point3> pts = random_points(1000, 4);
  const KdIndex index(pts);
  EXPECT_EQ(index.size(), 1000u);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto hit = index.nearest(pts[i]);
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->squared_distance, 0.0);
    EXPECT_EQ(hit->index, i);
  }
}

TEST(KdIndex, MatchesBruteForceExactly) {
  const std::vector<Point3> pts = random_points(10000, 5);
  const std::vector<Point3> queries = random_points(1000, 6, 60.0);
  const KdIndex index(pts);
  for (const Point3& q : queries) {
    const double expected = oracle::min_distance(q, pts);
    const double got = index.min_squared_distance(q);
    EXPECT_LE(std::abs(got - expected * expected), 1e-12 * (1.0 + expected * expected));
    const auto kd = index.nearest(q);
    const auto bf = brute_force_nearest(pts, q);
    ASSERT_TRUE(kd && bf);
    EXPECT_EQ(kd->index, bf->index);
    EXPECT_EQ(kd->squared_distance, bf->squared_distance);
  }
}

TEST(KdIndex, LeafSizeDoesNotChangeAnswers) {
  const std::vector<Point3> pts = random_points(3000, 7);
  const std::vector<Point3> queries = random_points(300, 8);
  const KdIndex a(pts, 1);
  const KdIndex b(pts, 16);
  const KdIndex c(pts, 5000);
  EXPECT_EQ(c.node_count(), 1u);
  EXPECT_GT(a.node_count(), b.node_count());
  for (const Point3& q : queries) {
    EXPECT_EQ(a.nearest(q)->index, b.nearest(q)->index);
    EXPECT_EQ(b.nearest(q)->index, c.nearest(q)->index);
  }
}

TEST(KdIndex, TiesResolveToLowestIndex) {
  // Many equidistant candidates around the origin, in scrambled order.
  std::vector<Point3> pts;
  for (int i = 0; i < 40; ++i) pts.emplace_back(5.0 + i, 0, 0);
  pts.emplace_back(0, 0, 2);
  pts.emplace_back(2, 0, 0);
  pts.emplace_back(0, -2, 0);
  pts.emplace_back(0, 2, 0);
  const KdIndex index(pts, 2);
  const auto hit = index.nearest({0, 0, 0});
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->index, 40u);
  EXPECT_EQ(hit->squared_distance, 4.0);
  EXPECT_EQ(brute_force_nearest(pts, {0, 0, 0})->index, 40u);
}

TEST(KdIndex, DuplicatePointsResolveToLowestIndex) {
  std::vector<Point3> pts(100, Point3(1, 1, 1));
  pts.insert(pts.begin(), Point3(9, 9, 9));
  const KdIndex index(pts, 4);
  EXPECT_EQ(index.nearest({1, 1, 1.5})->index, 1u);
  EXPECT_EQ(index.nearest({9, 9, 8})->index, 0u);
}

TEST(KdIndex, DegenerateCoplanarInput) {
  std::vector<Point3> pts;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) pts.emplace_back(i * 0.1, j * 0.1, 0.0);
  }
  const KdIndex index(pts);
  const std::vector<Point3> queries = random_points(200, 9, 6.0);
  for (const Point3& q : queries) {
    EXPECT_EQ(index.nearest(q)->index, brute_force_nearest(pts, q)->index);
  }
}

TEST(KdIndex, PrunesOnUniformData) {
  const std::vector<Point3> pts = random_points(200000, 10);
  const KdIndex index(pts);
  const std::vector<Point3> queries = random_points(500, 11);
  std::size_t visited = 0;
  for (const Point3& q : queries) {
    QueryStats stats;
    index.nearest(q, &stats);
    visited += stats.nodes_visited;
  }
  EXPECT_LT(static_cast<double>(visited) / queries.size(), 0.05 * pts.size());
}

TEST(KdIndex, ConcurrentQueriesAgree) {
  const std::vector<Point3> pts = random_points(20000, 12);
  const std::vector<Point3> queries = random_points(4000, 13);
  const KdIndex index(pts);
  std::vector<double> serial(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) serial[i] = index.min_squared_distance(queries[i]);

  std::vector<double> parallel(queries.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < 4; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t i = t; i < queries.size(); i += 4) {
          parallel[i] = index.min_squared_distance(queries[i]);
        }
      });
    }
  }
  EXPECT_EQ(serial, parallel);
}

TEST(BruteForceNearest, EmptyAndBasic) {
  EXPECT_FALSE(brute_force_nearest({}, {0, 0, 0}).has_value());
  const std::vector<Point3> pts{{0, 0, 0}, {1, 0, 0}};
  EXPECT_EQ(brute_force_nearest(pts, {0.9, 0, 0})->index, 1u);
}

}  // namespace
}  // namespace ffusion
