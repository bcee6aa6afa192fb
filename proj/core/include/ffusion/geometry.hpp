// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_GEOMETRY_HPP
#define FFUSION_GEOMETRY_HPP

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace ffusion {

/// x right, y down, z forward in a camera frame; sensor axes in the LiDAR frame.
using Point3 = Eigen::Vector3d;

/// Tolerance under which a point on a bounding plane still counts as inside.
inline constexpr double kPlaneTolerance = 1e-12;

enum class Frame : std::uint8_t { Lidar, LeftCamera, RightCamera, Common };

enum class ObjectClass : std::uint8_t { Car, Cyclist, Pedestrian };

std::string_view to_string(Frame frame);
std::string_view to_string(ObjectClass cls);
std::optional<ObjectClass> parse_object_class(std::string_view name);

struct Pixel {
  double u = 0.0;
  double v = 0.0;
};

struct ImageSize {
  int width = 0;
  int height = 0;

  friend bool operator==(const ImageSize&, const ImageSize&) = default;
};

/// Pinhole intrinsics of one rectified camera. Construction validates
/// positive focal lengths and a principal point strictly inside the image.
class CameraIntrinsics {
 public:
  CameraIntrinsics(double f_u, double f_v, double c_u, double c_v, ImageSize image);

  double f_u() const { return f_u_; }
  double f_v() const { return f_v_; }
  double c_u() const { return c_u_; }
  double c_v() const { return c_v_; }
  ImageSize image() const { return image_; }
  int width() const { return image_.width; }
  int height() const { return image_.height; }

 private:
  double f_u_;
  double f_v_;
  double c_u_;
  double c_v_;
  ImageSize image_;
};

/// Rotation plus translation, p' = R p + t. The rotation is checked to be
/// orthonormal with determinant +1 to within 1e-9.
class RigidTransform {
 public:
  RigidTransform();
  RigidTransform(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform from_translation(const Eigen::Vector3d& translation);
  /// Projects an approximately orthonormal matrix onto SO(3) first. Used for
  /// calibration matrices printed with a handful of significant digits.
  static RigidTransform nearest(const Eigen::Matrix3d& approx_rotation,
                                const Eigen::Vector3d& translation);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Point3 apply(const Point3& p) const { return rotation_ * p + translation_; }
  Point3 operator()(const Point3& p) const { return apply(p); }
  RigidTransform inverse() const;

  /// (a * b)(p) == a(b(p))
  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b);

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

/// Rectified stereo pair. The right camera sits at +baseline along the left
/// camera's x axis and shares its focal length.
class StereoRig {
 public:
  StereoRig(CameraIntrinsics left, CameraIntrinsics right, double baseline);

  const CameraIntrinsics& left() const { return left_; }
  const CameraIntrinsics& right() const { return right_; }
  double baseline() const { return baseline_; }

  /// Maps right-camera coordinates into the left camera frame.
  RigidTransform right_to_left() const;

 private:
  CameraIntrinsics left_;
  CameraIntrinsics right_;
  double baseline_;
};

struct BBox2D {
  double u_min = 0.0;
  double v_min = 0.0;
  double u_max = 0.0;
  double v_max = 0.0;
  ObjectClass class_label = ObjectClass::Car;

  double width() const { return u_max - u_min; }
  double height() const { return v_max - v_min; }
  double area() const { return width() * height(); }
  bool contains(const Pixel& px) const {
    return px.u >= u_min && px.u <= u_max && px.v >= v_min && px.v <= v_max;
  }
};

/// Clamps to [0, width-1] x [0, height-1]. Throws GeometryError when the box
/// is degenerate or lies entirely outside the image.
BBox2D clamp_to_image(const BBox2D& box, ImageSize image);

/// Oriented half-space: a point p is inside when normal.dot(p) + offset >= 0.
struct Plane {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;

  double signed_distance(const Point3& p) const { return normal.dot(p) + offset; }
};

class Frustum {
 public:
  Frustum(std::vector<Plane> planes, Frame frame);

  const std::vector<Plane>& planes() const { return planes_; }
  Frame frame() const { return frame_; }

  bool contains(const Point3& p) const {
    for (const Plane& plane : planes_) {
      if (plane.signed_distance(p) < -kPlaneTolerance) return false;
    }
    return true;
  }

  /// Smallest |signed distance| over all planes.
  double boundary_distance(const Point3& p) const;

 private:
  std::vector<Plane> planes_;
  Frame frame_;
};

class FrustumIntersection {
 public:
  FrustumIntersection(Frustum left, Frustum right);

  const Frustum& left() const { return left_; }
  const Frustum& right() const { return right_; }
  Frame frame() const { return left_.frame(); }

  bool contains(const Point3& p) const { return left_.contains(p) && right_.contains(p); }
  double boundary_distance(const Point3& p) const;

 private:
  Frustum left_;
  Frustum right_;
};

/// Pinhole projection; std::nullopt when the point is not in front of the camera.
std::optional<Pixel> project(const Point3& point, const CameraIntrinsics& cam);

/// Inverse of project() at a given depth z.
Point3 unproject(const Pixel& px, double depth, const CameraIntrinsics& cam);

/// Six half-spaces (four side planes through the camera centre plus near and
/// far) expressed in the frame reached by cam_to_frame. The box is clamped to
/// the image first.
Frustum frustum_from_bbox(const BBox2D& box, const CameraIntrinsics& cam,
                          const RigidTransform& cam_to_frame, double near, double far,
                          Frame frame = Frame::Common);

/// Intersection of the left and right frustums of one stereo detection.
FrustumIntersection stereo_intersection(const BBox2D& left_box, const BBox2D& right_box,
                                        const StereoRig& rig,
                                        const RigidTransform& left_to_frame, double near,
                                        double far, Frame frame = Frame::Common);

inline bool in_intersection(const Point3& point, const FrustumIntersection& fi) {
  return fi.contains(point);
}

}  // namespace ffusion

#endif  // FFUSION_GEOMETRY_HPP
