// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include "ffusion/kitti_io.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include <Eigen/Dense>

#include "ffusion/error.hpp"

namespace ffusion {

static_assert(std::endian::native == std::endian::little,
              "scan files are read by memcpy on little-endian hosts");

namespace {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("short write to " + path.string());
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::optional<double> to_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void check_near_rotation(const Eigen::Matrix3d& r, std::string_view key,
                         std::string_view origin) {
  const double err = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (!std::isfinite(err) || err > 1e-3 || r.determinant() <= 0.0) {
    throw ParseError(std::string(origin) + ": " + std::string(key) +
                     " is not a rotation (max |R^T R - I| = " + std::to_string(err) + ")");
  }
}

CameraIntrinsics intrinsics_from(const Matrix34& p, ImageSize image) {
  return CameraIntrinsics(p(0, 0), p(1, 1), p(0, 2), p(1, 2), image);
}

}  // namespace

PointCloud read_velodyne_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw IoError("cannot open " + path.string());
  const auto size = static_cast<std::size_t>(in.tellg());
  if (size % kScanRecordBytes != 0) {
    throw ParseError(path.string() + ": truncated record at byte offset " +
                     std::to_string(size - size % kScanRecordBytes) + " (file is " +
                     std::to_string(size) + " bytes)");
  }
  in.seekg(0);
  std::vector<float> buffer(size / sizeof(float));
  if (size > 0 && !in.read(reinterpret_cast<char*>(buffer.data()),
                           static_cast<std::streamsize>(size))) {
    throw IoError("short read from " + path.string());
  }
  const std::size_t n = size / kScanRecordBytes;
  PointCloud cloud;
  cloud.frame = Frame::Lidar;
  cloud.source = CloudSource::Lidar;
  cloud.points.reserve(n);
  cloud.intensities.emplace();
  cloud.intensities->reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float* rec = buffer.data() + 4 * i;
    if (!std::isfinite(rec[0]) || !std::isfinite(rec[1]) || !std::isfinite(rec[2]) ||
        !std::isfinite(rec[3])) {
      throw ParseError(path.string() + ": non-finite value in record " + std::to_string(i));
    }
    cloud.points.emplace_back(rec[0], rec[1], rec[2]);
    cloud.intensities->push_back(rec[3]);
  }
  return cloud;
}

void write_velodyne_bin(const PointCloud& cloud, const std::filesystem::path& path) {
  cloud.check_invariants();
  std::vector<float> buffer;
  buffer.reserve(cloud.size() * 4);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    buffer.push_back(static_cast<float>(p.x()));
    buffer.push_back(static_cast<float>(p.y()));
    buffer.push_back(static_cast<float>(p.z()));
    buffer.push_back(cloud.intensity(i));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buffer.data()),
            static_cast<std::streamsize>(buffer.size() * sizeof(float)));
  if (!out) throw IoError("short write to " + path.string());
}

CalibBundle parse_calib_bundle(std::string_view text, std::string_view origin) {
  std::map<std::string, std::vector<double>, std::less<>> entries;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) {
      throw ParseError(std::string(origin) + ":" + std::to_string(line_no) +
                       ": expected 'KEY: values'");
    }
    const std::string key(trim(line.substr(0, colon)));
    std::vector<double> values;
    for (std::string_view token : split_ws(line.substr(colon + 1))) {
      const auto v = to_double(token);
      if (!v) {
        throw ParseError(std::string(origin) + ":" + std::to_string(line_no) + ": bad number '" +
                         std::string(token) + "' for " + key);
      }
      values.push_back(*v);
    }
    if (!entries.emplace(key, std::move(values)).second) {
      throw ParseError(std::string(origin) + ":" + std::to_string(line_no) + ": duplicate key " +
                       key);
    }
  }

  const auto fetch = [&](std::initializer_list<std::string_view> names,
                         std::size_t count) -> const std::vector<double>* {
    for (std::string_view name : names) {
      const auto it = entries.find(name);
      if (it == entries.end()) continue;
      if (it->second.size() != count) {
        throw ParseError(std::string(origin) + ": " + std::string(name) + " expects " +
                         std::to_string(count) + " values, got " +
                         std::to_string(it->second.size()));
      }
      return &it->second;
    }
    return nullptr;
  };
  const auto require = [&](std::initializer_list<std::string_view> names, std::size_t count) {
    const auto* v = fetch(names, count);
    if (!v) throw ParseError(std::string(origin) + ": " + std::string(*names.begin()) + " absent");
    return v;
  };
  const auto to34 = [](const std::vector<double>& v) {
    return Matrix34(Eigen::Map<const Matrix34>(v.data()));
  };

  CalibBundle bundle;
  const auto* p2 = require({"P2"}, 12);
  const auto* p3 = require({"P3"}, 12);
  bundle.P[2] = to34(*p2);
  bundle.P[3] = to34(*p3);
  const auto* p0 = fetch({"P0"}, 12);
  const auto* p1 = fetch({"P1"}, 12);
  bundle.P[0] = p0 ? to34(*p0) : bundle.P[2];
  bundle.P[1] = p1 ? to34(*p1) : bundle.P[3];
  const auto* r0 = require({"R0_rect", "R_rect"}, 9);
  bundle.R0 = Eigen::Map<const Eigen::Matrix<double, 3, 3, Eigen::RowMajor>>(r0->data());
  check_near_rotation(bundle.R0, "R0_rect", origin);
  bundle.Tr = to34(*require({"Tr_velo_to_cam", "Tr_velo_cam"}, 12));
  check_near_rotation(bundle.Tr.leftCols<3>(), "Tr_velo_to_cam", origin);
  return bundle;
}

Calibration make_calibration(const CalibBundle& bundle, ImageSize image) {
  const Matrix34& p2 = bundle.P[2];
  const Matrix34& p3 = bundle.P[3];
  const CameraIntrinsics left = intrinsics_from(p2, image);
  const CameraIntrinsics right = intrinsics_from(p3, image);
  const double baseline = (p2(0, 3) - p3(0, 3)) / left.f_u();
  if (!(baseline > 0.0)) {
    throw GeometryError("calibration yields a non-positive baseline (" +
                        std::to_string(baseline) + " m)");
  }
  StereoRig rig(left, right, baseline);

  // P2 = K [I | t2]: camera 2 sits at -t2 in the rectified reference frame.
  const Eigen::Matrix3d k = p2.leftCols<3>();
  const Eigen::Vector3d t2 = k.triangularView<Eigen::Upper>().solve(p2.col(3));
  const RigidTransform rect_to_left = RigidTransform::from_translation(t2);
  const RigidTransform r0 = RigidTransform::nearest(bundle.R0, Eigen::Vector3d::Zero());
  const RigidTransform tr = RigidTransform::nearest(bundle.Tr.leftCols<3>(), bundle.Tr.col(3));
  return Calibration{bundle, rig, rect_to_left * r0 * tr};
}

CalibBundle read_calib_bundle(const std::filesystem::path& path) {
  return parse_calib_bundle(read_text(path), path.string());
}

Calibration parse_calib(const std::filesystem::path& path, ImageSize image) {
  return make_calibration(read_calib_bundle(path), image);
}

std::string format_calib(const CalibBundle& bundle) {
  std::string out;
  const auto emit = [&](std::string_view key, const double* data, std::size_t n) {
    out.append(key);
    out.push_back(':');
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(' ');
      out += shortest(data[i]);
    }
    out.push_back('\n');
  };
  for (int i = 0; i < 4; ++i) {
    emit("P" + std::to_string(i), bundle.P[i].data(), 12);
  }
  const Eigen::Matrix<double, 3, 3, Eigen::RowMajor> r0 = bundle.R0;
  emit("R0_rect", r0.data(), 9);
  emit("Tr_velo_to_cam", bundle.Tr.data(), 12);
  return out;
}

void write_calib(const CalibBundle& bundle, const std::filesystem::path& path) {
  write_text(format_calib(bundle), path);
}

BBox2D Label3D::left_bbox() const {
  if (!object_class) throw Error("label of type " + type + " has no fusable class");
  return BBox2D{left_box.u_min, left_box.v_min, left_box.u_max, left_box.v_max, *object_class};
}

std::vector<Label3D> parse_labels_text(std::string_view text, std::string_view origin) {
  std::vector<Label3D> labels;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    const auto fields = split_ws(line);
    if (fields.empty()) continue;
    const auto where = [&] { return std::string(origin) + ":" + std::to_string(line_no) + ": "; };
    if (fields.size() != 15 && fields.size() != 16) {
      throw ParseError(where() + "expected 15 fields, got " + std::to_string(fields.size()));
    }
    std::array<double, 15> num{};
    for (std::size_t i = 1; i < fields.size(); ++i) {
      const auto v = to_double(fields[i]);
      if (!v) throw ParseError(where() + "bad number '" + std::string(fields[i]) + "'");
      num[i - 1] = *v;
    }
    Label3D label;
    label.type = std::string(fields[0]);
    label.object_class = parse_object_class(label.type);
    label.truncation = num[0];
    label.occlusion = static_cast<int>(num[1]);
    label.alpha = num[2];
    label.left_box = PixelRect{num[3], num[4], num[5], num[6]};
    label.height = num[7];
    label.width = num[8];
    label.length = num[9];
    label.location = Eigen::Vector3d(num[10], num[11], num[12]);
    label.rotation_y = num[13];
    if (fields.size() == 16) label.score = num[14];
    if (label.object_class &&
        !(label.height > 0.0 && label.width > 0.0 && label.length > 0.0)) {
      throw ParseError(where() + label.type + " needs positive dimensions");
    }
    labels.push_back(std::move(label));
  }
  return labels;
}

std::vector<Label3D> parse_labels(const std::filesystem::path& path) {
  return parse_labels_text(read_text(path), path.string());
}

std::string format_labels(std::span<const Label3D> labels) {
  std::string out;
  for (const Label3D& l : labels) {
    out += l.type;
    const double values[] = {l.truncation,   static_cast<double>(l.occlusion),
                             l.alpha,        l.left_box.u_min,
                             l.left_box.v_min, l.left_box.u_max,
                             l.left_box.v_max, l.height,
                             l.width,        l.length,
                             l.location.x(), l.location.y(),
                             l.location.z(), l.rotation_y};
    for (double v : values) {
      out.push_back(' ');
      out += shortest(v);
    }
    if (l.score) {
      out.push_back(' ');
      out += shortest(*l.score);
    }
    out.push_back('\n');
  }
  return out;
}

void write_labels(std::span<const Label3D> labels, const std::filesystem::path& path) {
  write_text(format_labels(labels), path);
}

std::array<Eigen::Vector3d, 8> box_corners(const Label3D& label) {
  const double c = std::cos(label.rotation_y);
  const double s = std::sin(label.rotation_y);
  Eigen::Matrix3d rot;
  rot << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  const double hl = label.length / 2.0;
  const double hw = label.width / 2.0;
  const double h = label.height;
  const std::array<Eigen::Vector3d, 8> local{{{hl, 0.0, hw},
                                              {hl, 0.0, -hw},
                                              {-hl, 0.0, -hw},
                                              {-hl, 0.0, hw},
                                              {hl, -h, hw},
                                              {hl, -h, -hw},
                                              {-hl, -h, -hw},
                                              {-hl, -h, hw}}};
  std::array<Eigen::Vector3d, 8> out;
  for (std::size_t i = 0; i < 8; ++i) out[i] = rot * local[i] + label.location;
  return out;
}

PixelRect project_box_hull(const Label3D& label, const Matrix34& projection) {
  PixelRect hull{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity(),
                 -std::numeric_limits<double>::infinity()};
  int behind = 0;
  for (const Eigen::Vector3d& corner : box_corners(label)) {
    const Eigen::Vector3d h = projection * corner.homogeneous();
    if (!(h.z() > 0.0)) {
      ++behind;
      continue;
    }
    const double u = h.x() / h.z();
    const double v = h.y() / h.z();
    hull.u_min = std::min(hull.u_min, u);
    hull.u_max = std::max(hull.u_max, u);
    hull.v_min = std::min(hull.v_min, v);
    hull.v_max = std::max(hull.v_max, v);
  }
  if (behind == 8) throw GeometryError("3D box lies entirely behind the camera");
  if (behind > 0) throw GeometryError("3D box crosses the camera plane");
  return hull;
}

BBox2D derive_right_bbox(const Label3D& label, const CalibBundle& calib, ImageSize image) {
  if (!label.object_class) throw Error("label of type " + label.type + " is not fusable");
  const PixelRect hull = project_box_hull(label, calib.P[3]);
  const BBox2D box = clamp_to_image(
      BBox2D{hull.u_min, hull.v_min, hull.u_max, hull.v_max, *label.object_class}, image);
  if (box.area() < kMinBoxArea) {
    throw GeometryError("right-image box covers only " + std::to_string(box.area()) +
                        " px^2 inside the image");
  }
  return box;
}

std::vector<DetectionPair> detections_from_labels(std::span<const Label3D> labels,
                                                  const Calibration& calib,
                                                  std::vector<std::string>* skipped) {
  std::vector<DetectionPair> pairs;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const Label3D& label = labels[i];
    if (label.ignorable()) continue;
    try {
      const BBox2D left = clamp_to_image(label.left_bbox(), calib.rig.left().image());
      if (left.area() < kMinBoxArea) {
        throw GeometryError("left-image box covers only " + std::to_string(left.area()) +
                            " px^2 inside the image");
      }
      const BBox2D right = derive_right_bbox(label, calib.raw, calib.rig.right().image());
      pairs.push_back(DetectionPair{left, right, *label.object_class});
    } catch (const GeometryError& e) {
      if (skipped) {
        skipped->push_back("label " + std::to_string(i) + " (" + label.type + "): " + e.what());
      }
    }
  }
  return pairs;
}

}  // namespace ffusion
