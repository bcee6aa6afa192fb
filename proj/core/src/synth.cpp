// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include "ffusion/synth.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "ffusion/error.hpp"

namespace ffusion {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

Eigen::Vector3d typical_dimensions(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::Car: return {1.53, 1.63, 3.88};
    case ObjectClass::Cyclist: return {1.74, 0.60, 1.76};
    case ObjectClass::Pedestrian: return {1.76, 0.66, 0.84};
  }
  return {1.5, 1.6, 3.9};
}

Eigen::Matrix3d yaw(double ry) {
  const double c = std::cos(ry);
  const double s = std::sin(ry);
  Eigen::Matrix3d r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return r;
}

Eigen::Vector3d box_centre(const Label3D& box) {
  return box.location - Eigen::Vector3d(0.0, box.height / 2.0, 0.0);
}

/// Entry distance of a ray into an oriented box, or +inf.
double ray_box(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, const Label3D& box) {
  const Eigen::Matrix3d rt = yaw(box.rotation_y).transpose();
  const Eigen::Vector3d o = rt * (origin - box_centre(box));
  const Eigen::Vector3d d = rt * dir;
  const Eigen::Vector3d half(box.length / 2.0, box.height / 2.0, box.width / 2.0);
  double t_near = -kInf;
  double t_far = kInf;
  for (int a = 0; a < 3; ++a) {
    if (d[a] == 0.0) {
      if (std::abs(o[a]) > half[a]) return kInf;
      continue;
    }
    double t0 = (-half[a] - o[a]) / d[a];
    double t1 = (half[a] - o[a]) / d[a];
    if (t0 > t1) std::swap(t0, t1);
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return kInf;
  }
  return t_near > 0.0 ? t_near : kInf;
}

struct Hit {
  double t = kInf;
  bool on_object = false;
};

Hit cast(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
         std::span<const Label3D> boxes, double ground_y) {
  Hit hit;
  if (dir.y() > 1e-12) {
    const double t = (ground_y - origin.y()) / dir.y();
    if (t > 0.0) hit.t = t;
  }
  for (const Label3D& box : boxes) {
    const double t = ray_box(origin, dir, box);
    if (t < hit.t) hit = Hit{t, true};
  }
  return hit;
}

CalibBundle synthetic_calib(const SceneSpec& spec) {
  CalibBundle bundle;
  Matrix34 p = Matrix34::Zero();
  p(0, 0) = spec.focal;
  p(0, 2) = spec.c_u;
  p(1, 1) = spec.focal;
  p(1, 2) = spec.c_v;
  p(2, 2) = 1.0;
  bundle.P[0] = p;
  bundle.P[2] = p;
  p(0, 3) = -spec.focal * spec.baseline;
  bundle.P[1] = p;
  bundle.P[3] = p;
  bundle.R0.setIdentity();
  // Forward-left-up LiDAR mounted 8 cm above and 27 cm behind the camera.
  bundle.Tr << 0.0, -1.0, 0.0, 0.0,
               0.0, 0.0, -1.0, -0.08,
               1.0, 0.0, 0.0, -0.27;
  return bundle;
}

Label3D make_box(ObjectClass cls, const Eigen::Vector3d& dims, double x, double z, double ry,
                 double ground_y) {
  Label3D box;
  box.type = std::string(to_string(cls));
  box.object_class = cls;
  box.height = dims[0];
  box.width = dims[1];
  box.length = dims[2];
  box.location = Eigen::Vector3d(x, ground_y, z);
  box.rotation_y = std::remainder(ry, 2.0 * std::numbers::pi);
  box.alpha = std::remainder(box.rotation_y - std::atan2(x, z), 2.0 * std::numbers::pi);
  return box;
}

/// Empty string when the box is usable, else the reason it is not.
std::string placement_problem(Label3D& box, const SceneSpec& spec, const CalibBundle& calib) {
  double z_min = kInf;
  double z_max = -kInf;
  for (const Eigen::Vector3d& c : box_corners(box)) {
    z_min = std::min(z_min, c.z());
    z_max = std::max(z_max, c.z());
  }
  if (z_min < spec.near || z_max > spec.far) return "box depth range leaves [near, far]";
  const double max_u = spec.image.width - 1;
  const double max_v = spec.image.height - 1;
  for (int cam : {2, 3}) {
    PixelRect hull;
    try {
      hull = project_box_hull(box, calib.P[cam]);
    } catch (const GeometryError& e) {
      return e.what();
    }
    if (hull.u_min < 0.0 || hull.v_min < 0.0 || hull.u_max > max_u || hull.v_max > max_v) {
      return "box is not fully visible in camera " + std::to_string(cam);
    }
    if ((hull.u_max - hull.u_min) * (hull.v_max - hull.v_min) < kMinBoxArea) {
      return "box is too small in camera " + std::to_string(cam);
    }
    if (cam == 2) box.left_box = hull;
  }
  return {};
}

bool overlaps(const Label3D& a, const Label3D& b) {
  const double ra = 0.5 * std::hypot(a.length, a.width) + 0.5;
  const double rb = 0.5 * std::hypot(b.length, b.width) + 0.5;
  const double dx = a.location.x() - b.location.x();
  const double dz = a.location.z() - b.location.z();
  return std::hypot(dx, dz) < ra + rb;
}

template <class T>
T parse_number(std::string_view token, std::string_view key, std::string_view origin,
               std::size_t line) {
  T value{};
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(std::string(origin) + ":" + std::to_string(line) + ": bad value '" +
                     std::string(token) + "' for " + std::string(key));
  }
  return value;
}

}  // namespace

CalibBundle synthetic_calib_bundle(const SceneSpec& spec) { return synthetic_calib(spec); }

FusionWorkload make_fusion_workload(std::uint64_t seed, std::size_t lidar_points,
                                    std::size_t pl_points, std::size_t detections,
                                    const SceneSpec& spec) {
  FusionWorkload w{make_calibration(synthetic_calib_bundle(spec), spec.image), {}, {}, {}};
  const CameraIntrinsics& cam = w.calib.rig.left();
  const double width = spec.image.width - 1;
  const double height = spec.image.height - 1;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  struct Target {
    BBox2D box;
    double depth;
  };
  std::vector<Target> targets;
  const std::array<ObjectClass, 3> classes{ObjectClass::Car, ObjectClass::Cyclist,
                                           ObjectClass::Pedestrian};
  for (std::size_t i = 0; i < detections; ++i) {
    const ObjectClass cls = classes[i % classes.size()];
    const double depth = 8.0 + 32.0 * unit(rng);
    const double shift = cam.f_u() * w.calib.rig.baseline() / depth;
    const double bw = std::min(60.0 + 200.0 * unit(rng), width - shift - 1.0);
    const double bh = std::min(50.0 + 130.0 * unit(rng), height - 1.0);
    const double u0 = shift + (width - shift - bw) * unit(rng);
    const double v0 = (height - bh) * unit(rng);
    const BBox2D left{u0, v0, u0 + bw, v0 + bh, cls};
    BBox2D right = left;
    right.u_min -= shift;
    right.u_max -= shift;
    w.detections.push_back({left, right, cls});
    targets.push_back({left, depth});
  }

  auto sample = [&](std::size_t count) {
    std::vector<Point3> pts;
    pts.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      Pixel px;
      double depth;
      if (!targets.empty() && unit(rng) < 0.3) {
        const Target& t = targets[static_cast<std::size_t>(unit(rng) * targets.size()) %
                                  targets.size()];
        px = {t.box.u_min + (t.box.u_max - t.box.u_min) * unit(rng),
              t.box.v_min + (t.box.v_max - t.box.v_min) * unit(rng)};
        depth = t.depth + 3.0 * (unit(rng) - 0.5);
      } else {
        px = {width * unit(rng), height * unit(rng)};
        depth = 3.0 + 67.0 * unit(rng);
      }
      pts.push_back(unproject(px, depth, cam));
    }
    return pts;
  };

  const RigidTransform left_to_lidar = w.calib.lidar_to_left.inverse();
  w.lidar.frame = Frame::Lidar;
  w.lidar.source = CloudSource::Lidar;
  w.lidar.reserve(lidar_points);
  for (const Point3& p : sample(lidar_points)) {
    w.lidar.push_back(left_to_lidar.apply(p), static_cast<float>(unit(rng)));
  }
  w.pl.frame = Frame::LeftCamera;
  w.pl.source = CloudSource::PseudoLidar;
  w.pl.reserve(pl_points);
  for (const Point3& p : sample(pl_points)) w.pl.push_back(p, 0.0f);
  return w;
}

SceneSpec parse_scene_spec_text(std::string_view text, std::string_view origin) {
  SceneSpec spec;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(std::string(origin) + ":" + std::to_string(line_no) +
                       ": expected key = value");
    }
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto num = [&] { return parse_number<double>(value, key, origin, line_no); };
    const auto integer = [&] { return parse_number<int>(value, key, origin, line_no); };

    if (key == "image_width") spec.image.width = integer();
    else if (key == "image_height") spec.image.height = integer();
    else if (key == "focal") spec.focal = num();
    else if (key == "c_u") spec.c_u = num();
    else if (key == "c_v") spec.c_v = num();
    else if (key == "baseline") spec.baseline = num();
    else if (key == "camera_height") spec.camera_height = num();
    else if (key == "lidar_rings") spec.lidar_rings = integer();
    else if (key == "lidar_min_elevation_deg") spec.lidar_min_elevation_deg = num();
    else if (key == "lidar_max_elevation_deg") spec.lidar_max_elevation_deg = num();
    else if (key == "lidar_azimuth_step_deg") spec.lidar_azimuth_step_deg = num();
    else if (key == "lidar_max_range") spec.lidar_max_range = num();
    else if (key == "lidar_noise") spec.lidar_noise = num();
    else if (key == "pl_stride") spec.pl_stride = integer();
    else if (key == "pl_noise_k") spec.pl_noise_k = num();
    else if (key == "max_depth") spec.max_depth = num();
    else if (key == "height_clip") spec.height_clip = num();
    else if (key == "near") spec.near = num();
    else if (key == "far") spec.far = num();
    else if (key == "random_objects") spec.random_objects = integer();
    else if (key == "object_min_depth") spec.object_min_depth = num();
    else if (key == "object_max_depth") spec.object_max_depth = num();
    else if (key == "object") {
      std::vector<std::string_view> parts;
      std::size_t i = 0;
      while (i < value.size()) {
        while (i < value.size() && std::isspace(static_cast<unsigned char>(value[i]))) ++i;
        const std::size_t start = i;
        while (i < value.size() && !std::isspace(static_cast<unsigned char>(value[i]))) ++i;
        if (i > start) parts.push_back(value.substr(start, i - start));
      }
      if (parts.size() != 4 && parts.size() != 7) {
        throw ParseError(std::string(origin) + ":" + std::to_string(line_no) +
                         ": object needs <Class> <x> <z> <rotation_y> [h w l]");
      }
      const auto cls = parse_object_class(parts[0]);
      if (!cls) {
        throw ParseError(std::string(origin) + ":" + std::to_string(line_no) +
                         ": unknown object class '" + std::string(parts[0]) + "'");
      }
      PlacedObject obj;
      obj.object_class = *cls;
      obj.x = parse_number<double>(parts[1], key, origin, line_no);
      obj.z = parse_number<double>(parts[2], key, origin, line_no);
      obj.rotation_y = parse_number<double>(parts[3], key, origin, line_no);
      if (parts.size() == 7) {
        obj.dimensions = Eigen::Vector3d(parse_number<double>(parts[4], key, origin, line_no),
                                         parse_number<double>(parts[5], key, origin, line_no),
                                         parse_number<double>(parts[6], key, origin, line_no));
      }
      spec.objects.push_back(obj);
    } else {
      throw ParseError(std::string(origin) + ":" + std::to_string(line_no) + ": unknown key '" +
                       std::string(key) + "'");
    }
  }
  return spec;
}

SceneSpec parse_scene_spec(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scene_spec_text(ss.str(), path.string());
}

SyntheticScene generate_scene(std::uint64_t seed, const SceneSpec& spec) {
  if (spec.lidar_rings < 1 || spec.pl_stride < 1 || !(spec.lidar_azimuth_step_deg > 0.0)) {
    throw Error("scene spec needs lidar_rings >= 1, pl_stride >= 1 and a positive azimuth step");
  }
  if (!(spec.object_min_depth > 0.0) || spec.object_max_depth < spec.object_min_depth) {
    throw Error("scene spec has an empty object depth range");
  }
  std::mt19937_64 rng(seed);
  const CalibBundle bundle = synthetic_calib(spec);
  const Calibration calib = make_calibration(bundle, spec.image);
  const double ground_y = spec.camera_height;

  std::vector<Label3D> objects;
  for (std::size_t i = 0; i < spec.objects.size(); ++i) {
    const PlacedObject& obj = spec.objects[i];
    Label3D box = make_box(obj.object_class,
                           obj.dimensions.value_or(typical_dimensions(obj.object_class)), obj.x,
                           obj.z, obj.rotation_y, ground_y);
    if (box.height <= 0.0 || box.width <= 0.0 || box.length <= 0.0) {
      throw Error("object " + std::to_string(i) + " needs positive dimensions");
    }
    if (const std::string why = placement_problem(box, spec, bundle); !why.empty()) {
      throw Error("object " + std::to_string(i) + " (" + box.type + "): " + why);
    }
    objects.push_back(box);
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int n = 0; n < spec.random_objects; ++n) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      const double pick = unit(rng);
      const ObjectClass cls = pick < 0.6   ? ObjectClass::Car
                              : pick < 0.8 ? ObjectClass::Pedestrian
                                           : ObjectClass::Cyclist;
      const Eigen::Vector3d dims =
          typical_dimensions(cls).cwiseProduct(Eigen::Vector3d::Constant(0.9) +
                                               0.2 * Eigen::Vector3d(unit(rng), unit(rng), unit(rng)));
      const double z = spec.object_min_depth + (spec.object_max_depth - spec.object_min_depth) *
                                                   unit(rng);
      const double u = 0.1 * spec.image.width + 0.8 * spec.image.width * unit(rng);
      const double x = (u - spec.c_u) * z / spec.focal;
      const double ry = (2.0 * unit(rng) - 1.0) * std::numbers::pi;
      Label3D box = make_box(cls, dims, x, z, ry, ground_y);
      if (!placement_problem(box, spec, bundle).empty()) continue;
      if (std::any_of(objects.begin(), objects.end(),
                      [&](const Label3D& other) { return overlaps(box, other); })) {
        continue;
      }
      objects.push_back(box);
      break;
    }
  }

  // LiDAR: ring-structured rays cast from the sensor origin.
  const RigidTransform left_to_lidar = calib.lidar_to_left.inverse();
  const Eigen::Vector3d lidar_origin = calib.lidar_to_left.translation();
  const Eigen::Matrix3d lidar_to_cam = calib.lidar_to_left.rotation();
  const double half_fov =
      std::atan(std::max(spec.c_u, spec.image.width - spec.c_u) / spec.focal) + 5.0 * kDeg;
  const auto azimuth_steps =
      static_cast<int>(std::floor(2.0 * half_fov / (spec.lidar_azimuth_step_deg * kDeg)));
  std::normal_distribution<double> lidar_noise(0.0, std::max(spec.lidar_noise, 0.0));

  PointCloud lidar;
  lidar.frame = Frame::Lidar;
  lidar.source = CloudSource::Lidar;
  lidar.intensities.emplace();
  for (int ring = 0; ring < spec.lidar_rings; ++ring) {
    const double elevation =
        spec.lidar_rings == 1
            ? spec.lidar_min_elevation_deg * kDeg
            : (spec.lidar_min_elevation_deg +
               (spec.lidar_max_elevation_deg - spec.lidar_min_elevation_deg) * ring /
                   (spec.lidar_rings - 1)) *
                  kDeg;
    for (int step = 0; step <= azimuth_steps; ++step) {
      const double azimuth = -half_fov + step * spec.lidar_azimuth_step_deg * kDeg;
      const Eigen::Vector3d dir_lidar(std::cos(elevation) * std::cos(azimuth),
                                      std::cos(elevation) * std::sin(azimuth),
                                      std::sin(elevation));
      const Eigen::Vector3d dir = lidar_to_cam * dir_lidar;
      const Hit hit = cast(lidar_origin, dir, objects, ground_y);
      if (!(hit.t <= spec.lidar_max_range)) continue;
      double range = hit.t;
      if (spec.lidar_noise > 0.0) range += lidar_noise(rng);
      const Eigen::Vector3d p_cam = lidar_origin + range * dir;
      lidar.points.push_back(left_to_lidar.apply(p_cam));
      lidar.intensities->push_back(hit.on_object ? 0.45f : 0.2f);
    }
  }

  // Dense stereo: one depth sample per stride-th pixel, noise growing with z^2.
  DisparityMap disparity(spec.image.width, spec.image.height);
  const double fb = spec.focal * spec.baseline;
  for (int v = 0; v < spec.image.height; v += spec.pl_stride) {
    for (int u = 0; u < spec.image.width; u += spec.pl_stride) {
      const Eigen::Vector3d dir((u - spec.c_u) / spec.focal, (v - spec.c_v) / spec.focal, 1.0);
      const Hit hit = cast(Eigen::Vector3d::Zero(), dir, objects, ground_y);
      const double z = hit.t;  // dir.z() == 1
      if (!(z <= spec.max_depth)) continue;
      double z_noisy = z;
      if (spec.pl_noise_k > 0.0) {
        std::normal_distribution<double> depth_noise(0.0, spec.pl_noise_k * z * z);
        z_noisy += depth_noise(rng);
      }
      if (z_noisy <= 0.1) continue;
      disparity.set(u, v, fb / z_noisy);
    }
  }
  PseudoLidarOptions pl_options;
  pl_options.max_depth = spec.max_depth;
  pl_options.height_clip = spec.height_clip;
  PointCloud pl = disparity_to_cloud(disparity, calib.rig, pl_options);

  std::vector<DetectionPair> detections = detections_from_labels(objects, calib);
  return SyntheticScene{seed,         spec,
                        calib,        std::move(objects),
                        std::move(lidar), std::move(disparity),
                        std::move(pl), std::move(detections)};
}

bool point_in_box(const Point3& p, const Label3D& box, double margin) {
  const Eigen::Vector3d local = yaw(box.rotation_y).transpose() * (p - box_centre(box));
  return std::abs(local.x()) <= box.length / 2.0 + margin &&
         std::abs(local.y()) <= box.height / 2.0 + margin &&
         std::abs(local.z()) <= box.width / 2.0 + margin;
}

std::vector<BoxDensity> density_metrics(const PointCloud& cloud, std::span<const Label3D> boxes,
                                        double margin) {
  std::vector<BoxDensity> out;
  out.reserve(boxes.size());
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const Label3D& box = boxes[b];
    BoxDensity d;
    d.box_index = b;
    d.type = box.type;
    d.volume = box.height * box.width * box.length;
    for (const Point3& p : cloud.points) {
      if (point_in_box(p, box, margin)) ++d.count;
    }
    d.points_per_cubic_metre = d.volume > 0.0 ? static_cast<double>(d.count) / d.volume : 0.0;
    out.push_back(d);
  }
  return out;
}

}  // namespace ffusion
