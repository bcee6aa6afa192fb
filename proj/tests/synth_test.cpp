// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include <gtest/gtest.h>

#include "ffusion/error.hpp"
#include "ffusion/fusion.hpp"
#include "ffusion/synth.hpp"

namespace ffusion {
namespace {

SceneSpec one_car(double z = 20.0) {
  SceneSpec spec;
  spec.random_objects = 0;
  spec.objects.push_back({ObjectClass::Car, 0.5, z, 0.3, std::nullopt});
  return spec;
}

PointCloud in_left(const PointCloud& lidar, const RigidTransform& lidar_to_left) {
  return transform_cloud(lidar, lidar_to_left, Frame::LeftCamera);
}

TEST(GenerateScene, SameSeedSameScene) {
  const SceneSpec spec;
  const SyntheticScene a = generate_scene(11, spec);
  const SyntheticScene b = generate_scene(11, spec);
  EXPECT_EQ(a.lidar.points, b.lidar.points);
  EXPECT_EQ(a.lidar.intensities, b.lidar.intensities);
  EXPECT_EQ(a.pl.points, b.pl.points);
  ASSERT_EQ(a.objects.size(), b.objects.size());
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    EXPECT_EQ(a.objects[i].location, b.objects[i].location);
  }
  const SyntheticScene c = generate_scene(12, spec);
  EXPECT_NE(a.pl.points, c.pl.points);
}

TEST(GenerateScene, ZeroNoisePseudoLidarLiesOnSurfaces) {
  SceneSpec spec = one_car();
  spec.pl_noise_k = 0.0;
  spec.lidar_noise = 0.0;
  const SyntheticScene scene = generate_scene(1, spec);
  ASSERT_FALSE(scene.pl.empty());
  std::size_t on_box = 0;
  for (const Point3& p : scene.pl.points) {
    const bool ground = std::abs(p.y() - spec.camera_height) < 1e-9;
    const bool box = point_in_box(p, scene.objects[0], 1e-9) && !point_in_box(p, scene.objects[0], -1e-9);
    EXPECT_TRUE(ground || box) << p.transpose();
    on_box += box ? 1 : 0;
  }
  EXPECT_GT(on_box, 100u);

  const PointCloud lidar = in_left(scene.lidar, scene.calib.lidar_to_left);
  for (const Point3& p : lidar.points) {
    const bool ground = std::abs(p.y() - spec.camera_height) < 1e-9;
    const bool box = point_in_box(p, scene.objects[0], 1e-9) && !point_in_box(p, scene.objects[0], -1e-9);
    EXPECT_TRUE(ground || box) << p.transpose();
  }
}

TEST(GenerateScene, OneCarAtTwentyMetresHasStereoBoxes) {
  const SyntheticScene scene = generate_scene(2, one_car(20.0));
  ASSERT_EQ(scene.detections.size(), 1u);
  const DetectionPair& d = scene.detections[0];
  EXPECT_GT(d.left_box.area(), kMinBoxArea);
  EXPECT_GT(d.right_box.area(), kMinBoxArea);
  // The right box sits roughly one disparity to the left.
  const double disparity = scene.spec.focal * scene.spec.baseline / 20.0;
  EXPECT_NEAR(d.left_box.u_min - d.right_box.u_min, disparity, 3.0);
  EXPECT_NEAR(d.left_box.v_min, d.right_box.v_min, 1e-9);
}

TEST(GenerateScene, RandomObjectsAreVisibleAndSeparate) {
  SceneSpec spec;
  spec.random_objects = 6;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const SyntheticScene scene = generate_scene(seed, spec);
    EXPECT_EQ(scene.detections.size(), scene.objects.size());
    for (const Label3D& box : scene.objects) {
      EXPECT_GE(box.location.z(), spec.object_min_depth);
      EXPECT_LE(box.location.z(), spec.object_max_depth);
    }
  }
}

TEST(GenerateScene, ObjectsOutsideRangeAreRejected) {
  EXPECT_THROW(generate_scene(0, one_car(120.0)), Error);
  EXPECT_THROW(generate_scene(0, one_car(0.2)), Error);
  SceneSpec off_image = one_car(10.0);
  off_image.objects[0].x = 40.0;
  EXPECT_THROW(generate_scene(0, off_image), Error);
}

TEST(SceneSpecText, ParsesKeysAndObjects) {
  const SceneSpec spec = parse_scene_spec_text(
      "# test scene\n"
      "baseline = 0.5\n"
      "random_objects = 0\n"
      "object = Pedestrian -1.5 12 0.4\n"
      "object = Car 2 25 -1.2 1.4 1.7 4.1\n");
  EXPECT_EQ(spec.baseline, 0.5);
  EXPECT_EQ(spec.random_objects, 0);
  ASSERT_EQ(spec.objects.size(), 2u);
  EXPECT_EQ(spec.objects[0].object_class, ObjectClass::Pedestrian);
  EXPECT_FALSE(spec.objects[0].dimensions);
  EXPECT_EQ(*spec.objects[1].dimensions, Eigen::Vector3d(1.4, 1.7, 4.1));
  EXPECT_THROW(parse_scene_spec_text("bogus = 1\n"), ParseError);
  EXPECT_THROW(parse_scene_spec_text("baseline = x\n"), ParseError);
  EXPECT_THROW(parse_scene_spec_text("object = Truck 1 2 3\n"), ParseError);
}

TEST(DensityMetrics, Basics) {
  const SyntheticScene scene = generate_scene(3, one_car());
  PointCloud empty;
  empty.frame = Frame::LeftCamera;
  for (const BoxDensity& d : density_metrics(empty, scene.objects)) EXPECT_EQ(d.count, 0u);

  const Label3D& box = scene.objects[0];
  PointCloud centre;
  centre.frame = Frame::LeftCamera;
  centre.push_back(Point3(box.location - Eigen::Vector3d(0, box.height / 2, 0)), 0.0f);
  const auto m = density_metrics(centre, scene.objects);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_EQ(m[0].count, 1u);
  EXPECT_NEAR(m[0].volume, box.height * box.width * box.length, 1e-12);
  EXPECT_NEAR(m[0].points_per_cubic_metre, 1.0 / m[0].volume, 1e-12);
}

TEST(DensityMetrics, FusionIncreasesInBoxDensity) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const SyntheticScene scene = generate_scene(seed, SceneSpec{});
    FusionConfig config;
    config.tau = 0.05;
    const FusionResult fused =
        fuse_frame(scene.lidar, scene.pl, scene.detections, scene.setup(), config);
    const auto before = density_metrics(in_left(scene.lidar, scene.calib.lidar_to_left),
                                        scene.objects, 0.1);
    const auto after = density_metrics(in_left(fused.cloud, scene.calib.lidar_to_left),
                                       scene.objects, 0.1);
    for (std::size_t i = 0; i < before.size(); ++i) {
      EXPECT_GT(after[i].count, before[i].count) << "seed " << seed << " box " << i;
    }
  }
}

TEST(FrustumOnlyOutput, NothingOutsideTheDetections) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const SyntheticScene scene = generate_scene(seed, SceneSpec{});
    const FusionResult fused =
        fuse_frame(scene.lidar, scene.pl, scene.detections, scene.setup(), FusionConfig{});
    const CameraIntrinsics& cam = scene.calib.rig.left();
    const double b = scene.calib.rig.baseline();
    for (const Point3& q : fused.cloud.points) {
      const Point3 p = scene.calib.lidar_to_left.apply(q);
      const auto l = project(p, cam);
      const auto r = project(p - Point3(b, 0, 0), cam);
      ASSERT_TRUE(l && r);
      bool inside = false;
      for (const DetectionPair& d : scene.detections) {
        const BBox2D lb = clamp_to_image(d.left_box, cam.image());
        const BBox2D rb = clamp_to_image(d.right_box, cam.image());
        constexpr double eps = 1e-6;
        inside = inside || (l->u >= lb.u_min - eps && l->u <= lb.u_max + eps &&
                            l->v >= lb.v_min - eps && l->v <= lb.v_max + eps &&
                            r->u >= rb.u_min - eps && r->u <= rb.u_max + eps &&
                            r->v >= rb.v_min - eps && r->v <= rb.v_max + eps);
      }
      EXPECT_TRUE(inside) << q.transpose();
    }
  }
}

TEST(FusionWorkload, SizesAndDeterminism) {
  const FusionWorkload a = make_fusion_workload(4, 5000, 9000, 10);
  const FusionWorkload b = make_fusion_workload(4, 5000, 9000, 10);
  EXPECT_EQ(a.lidar.size(), 5000u);
  EXPECT_EQ(a.pl.size(), 9000u);
  ASSERT_EQ(a.detections.size(), 10u);
  EXPECT_EQ(a.lidar.points, b.lidar.points);
  EXPECT_EQ(a.pl.points, b.pl.points);
  const FusionResult r = fuse_frame(a.lidar, a.pl, a.detections, a.setup(), FusionConfig{});
  for (const DetectionReport& d : r.report.detections) {
    EXPECT_GT(d.lidar_in_intersection, 0u);
    EXPECT_GT(d.pl_in_intersection, 0u);
  }
}

}  // namespace
}  // namespace ffusion
