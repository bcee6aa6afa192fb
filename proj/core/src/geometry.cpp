// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include "ffusion/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "ffusion/error.hpp"

namespace ffusion {

std::string_view to_string(Frame frame) {
  switch (frame) {
    case Frame::Lidar: return "lidar";
    case Frame::LeftCamera: return "left_camera";
    case Frame::RightCamera: return "right_camera";
    case Frame::Common: return "common";
  }
  return "unknown";
}

std::string_view to_string(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::Car: return "Car";
    case ObjectClass::Cyclist: return "Cyclist";
    case ObjectClass::Pedestrian: return "Pedestrian";
  }
  return "unknown";
}

std::optional<ObjectClass> parse_object_class(std::string_view name) {
  if (name == "Car") return ObjectClass::Car;
  if (name == "Cyclist") return ObjectClass::Cyclist;
  if (name == "Pedestrian") return ObjectClass::Pedestrian;
  return std::nullopt;
}

CameraIntrinsics::CameraIntrinsics(double f_u, double f_v, double c_u, double c_v,
                                   ImageSize image)
    : f_u_(f_u), f_v_(f_v), c_u_(c_u), c_v_(c_v), image_(image) {
  if (!(f_u > 0.0) || !(f_v > 0.0) || !std::isfinite(f_u) || !std::isfinite(f_v)) {
    throw GeometryError("camera focal lengths must be positive and finite");
  }
  if (image.width <= 0 || image.height <= 0) {
    throw GeometryError("camera image size must be positive");
  }
  if (!(c_u > 0.0 && c_u < image.width) || !(c_v > 0.0 && c_v < image.height)) {
    throw GeometryError("principal point (" + std::to_string(c_u) + ", " +
                        std::to_string(c_v) + ") lies outside the " +
                        std::to_string(image.width) + "x" + std::to_string(image.height) +
                        " image");
  }
}

namespace {

constexpr double kRotationTolerance = 1e-9;

void check_rotation(const Eigen::Matrix3d& r) {
  if (!r.allFinite()) throw GeometryError("rotation has non-finite entries");
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > kRotationTolerance) {
    throw GeometryError("rotation is not orthonormal (max |R^T R - I| = " +
                        std::to_string(ortho) + ")");
  }
  if (std::abs(r.determinant() - 1.0) > kRotationTolerance) {
    throw GeometryError("rotation determinant is not +1");
  }
}

}  // namespace

RigidTransform::RigidTransform()
    : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

RigidTransform::RigidTransform(const Eigen::Matrix3d& rotation,
                               const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  check_rotation(rotation_);
  if (!translation_.allFinite()) throw GeometryError("translation has non-finite entries");
}

RigidTransform RigidTransform::from_translation(const Eigen::Vector3d& translation) {
  return RigidTransform(Eigen::Matrix3d::Identity(), translation);
}

RigidTransform RigidTransform::nearest(const Eigen::Matrix3d& approx_rotation,
                                       const Eigen::Vector3d& translation) {
  if (!approx_rotation.allFinite()) throw GeometryError("rotation has non-finite entries");
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(approx_rotation,
                                        Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) u.col(2) *= -1.0;
  return RigidTransform(u * v.transpose(), translation);
}

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation_ = rotation_.transpose();
  inv.translation_ = -(inv.rotation_ * translation_);
  return inv;
}

RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
  RigidTransform out;
  out.rotation_ = a.rotation_ * b.rotation_;
  out.translation_ = a.rotation_ * b.translation_ + a.translation_;
  return out;
}

StereoRig::StereoRig(CameraIntrinsics left, CameraIntrinsics right, double baseline)
    : left_(left), right_(right), baseline_(baseline) {
  if (!(baseline > 0.0) || !std::isfinite(baseline)) {
    throw GeometryError("stereo baseline must be positive");
  }
  const double rel = std::abs(left.f_u() - right.f_u()) / left.f_u();
  if (rel > 1e-6) {
    throw GeometryError("rectified stereo pair must share f_u (relative difference " +
                        std::to_string(rel) + ")");
  }
  if (!(left.image() == right.image())) {
    throw GeometryError("rectified stereo pair must share the image size");
  }
}

RigidTransform StereoRig::right_to_left() const {
  return RigidTransform::from_translation(Eigen::Vector3d(baseline_, 0.0, 0.0));
}

BBox2D clamp_to_image(const BBox2D& box, ImageSize image) {
  if (!std::isfinite(box.u_min) || !std::isfinite(box.u_max) || !std::isfinite(box.v_min) ||
      !std::isfinite(box.v_max)) {
    throw GeometryError("bounding box has non-finite coordinates");
  }
  if (!(box.u_min < box.u_max) || !(box.v_min < box.v_max)) {
    throw GeometryError("degenerate bounding box (zero area)");
  }
  const double max_u = image.width - 1;
  const double max_v = image.height - 1;
  if (box.u_max < 0.0 || box.v_max < 0.0 || box.u_min > max_u || box.v_min > max_v) {
    throw GeometryError("bounding box lies entirely outside the image");
  }
  BBox2D out = box;
  out.u_min = std::clamp(box.u_min, 0.0, max_u);
  out.u_max = std::clamp(box.u_max, 0.0, max_u);
  out.v_min = std::clamp(box.v_min, 0.0, max_v);
  out.v_max = std::clamp(box.v_max, 0.0, max_v);
  if (!(out.u_min < out.u_max) || !(out.v_min < out.v_max)) {
    throw GeometryError("bounding box has zero area after clamping to the image");
  }
  return out;
}

Frustum::Frustum(std::vector<Plane> planes, Frame frame)
    : planes_(std::move(planes)), frame_(frame) {
  if (planes_.size() < 4 || planes_.size() > 6) {
    throw GeometryError("a frustum needs between 4 and 6 planes");
  }
  for (const Plane& plane : planes_) {
    if (!plane.normal.allFinite() || !std::isfinite(plane.offset) ||
        std::abs(plane.normal.norm() - 1.0) > 1e-9) {
      throw GeometryError("frustum plane normals must be finite unit vectors");
    }
  }
}

double Frustum::boundary_distance(const Point3& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Plane& plane : planes_) best = std::min(best, std::abs(plane.signed_distance(p)));
  return best;
}

FrustumIntersection::FrustumIntersection(Frustum left, Frustum right)
    : left_(std::move(left)), right_(std::move(right)) {
  if (left_.frame() != right_.frame()) {
    throw GeometryError("frustums of an intersection must share a frame");
  }
}

double FrustumIntersection::boundary_distance(const Point3& p) const {
  return std::min(left_.boundary_distance(p), right_.boundary_distance(p));
}

std::optional<Pixel> project(const Point3& point, const CameraIntrinsics& cam) {
  if (!(point.z() > 0.0)) return std::nullopt;
  return Pixel{point.x() * cam.f_u() / point.z() + cam.c_u(),
               point.y() * cam.f_v() / point.z() + cam.c_v()};
}

Point3 unproject(const Pixel& px, double depth, const CameraIntrinsics& cam) {
  return {(px.u - cam.c_u()) * depth / cam.f_u(), (px.v - cam.c_v()) * depth / cam.f_v(),
          depth};
}

namespace {

Plane make_plane(const Eigen::Vector3d& normal, double offset,
                 const RigidTransform& cam_to_frame) {
  const double norm = normal.norm();
  const Eigen::Vector3d n = cam_to_frame.rotation() * (normal / norm);
  return Plane{n, offset / norm - n.dot(cam_to_frame.translation())};
}

}  // namespace

Frustum frustum_from_bbox(const BBox2D& box, const CameraIntrinsics& cam,
                          const RigidTransform& cam_to_frame, double near, double far,
                          Frame frame) {
  if (!(near > 0.0) || !(far > near) || !std::isfinite(far)) {
    throw GeometryError("frustum clip planes need 0 < near < far");
  }
  const BBox2D b = clamp_to_image(box, cam.image());
  // A point projects inside [u_min, u_max] iff f_u x + (c_u - u_min) z >= 0
  // and -f_u x + (u_max - c_u) z >= 0, for z > 0. Same for v.
  std::vector<Plane> planes;
  planes.reserve(6);
  planes.push_back(make_plane({cam.f_u(), 0.0, cam.c_u() - b.u_min}, 0.0, cam_to_frame));
  planes.push_back(make_plane({-cam.f_u(), 0.0, b.u_max - cam.c_u()}, 0.0, cam_to_frame));
  planes.push_back(make_plane({0.0, cam.f_v(), cam.c_v() - b.v_min}, 0.0, cam_to_frame));
  planes.push_back(make_plane({0.0, -cam.f_v(), b.v_max - cam.c_v()}, 0.0, cam_to_frame));
  planes.push_back(make_plane({0.0, 0.0, 1.0}, -near, cam_to_frame));
  planes.push_back(make_plane({0.0, 0.0, -1.0}, far, cam_to_frame));
  return Frustum(std::move(planes), frame);
}

FrustumIntersection stereo_intersection(const BBox2D& left_box, const BBox2D& right_box,
                                        const StereoRig& rig,
                                        const RigidTransform& left_to_frame, double near,
                                        double far, Frame frame) {
  return FrustumIntersection(
      frustum_from_bbox(left_box, rig.left(), left_to_frame, near, far, frame),
      frustum_from_bbox(right_box, rig.right(), left_to_frame * rig.right_to_left(), near,
                        far, frame));
}

}  // namespace ffusion
