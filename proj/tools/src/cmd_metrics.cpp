// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <memory>

#include "commands.hpp"
#include "ffusion/error.hpp"
#include "ffusion/kitti_io.hpp"
#include "ffusion/synth.hpp"
#include "ffusion_cli/cli.hpp"

namespace ffusion::cli {

namespace {

struct MetricsOptions {
  fs::path calib;
  fs::path labels;
  fs::path cloud;
  std::string cloud_frame = "lidar";
  double margin = 0.0;
  fs::path out;
};

int run_metrics(const MetricsOptions& o, Io io) {
  if (o.cloud_frame != "lidar" && o.cloud_frame != "camera") {
    throw Error("--cloud-frame must be 'lidar' or 'camera'");
  }
  const Calibration calib = staged("calib", [&] { return parse_calib(o.calib); });
  std::vector<Label3D> boxes;
  for (Label3D& label : staged("labels", [&] { return parse_labels(o.labels); })) {
    if (!label.ignorable()) boxes.push_back(std::move(label));
  }
  PointCloud cloud = staged("cloud", [&] { return read_velodyne_bin(o.cloud); });
  if (o.cloud_frame == "lidar") {
    cloud = transform_cloud(cloud, calib.lidar_to_left, Frame::LeftCamera);
  } else {
    cloud.frame = Frame::LeftCamera;
  }

  std::vector<json> records;
  for (const BoxDensity& d : density_metrics(cloud, boxes, o.margin)) {
    records.push_back({{"box", d.box_index},
                       {"type", d.type},
                       {"count", d.count},
                       {"volume_m3", d.volume},
                       {"points_per_m3", d.points_per_cubic_metre}});
  }
  const std::string text = jsonl(records);
  if (o.out.empty()) {
    io.out << text;
  } else {
    staged("write", [&] { write_text_atomically(o.out, text); });
  }
  return kExitOk;
}

}  // namespace

Command add_metrics(CLI::App& parent) {
  auto o = std::make_shared<MetricsOptions>();
  CLI::App* sub = parent.add_subcommand(
      "metrics", "Per-box point counts and densities, one JSON record per box");
  sub->add_option("--calib", o->calib, "Calibration file")->required();
  sub->add_option("--labels", o->labels, "Label file with the boxes")->required();
  sub->add_option("--cloud", o->cloud, "Scan binary to measure")->required();
  sub->add_option("--cloud-frame", o->cloud_frame, "Frame of the scan: lidar or camera")
      ->capture_default_str();
  sub->add_option("--margin", o->margin, "Grow every box by this much (m)")->capture_default_str();
  sub->add_option("--out", o->out, "Write records here instead of stdout");
  return {sub, [o](Io io) { return run_metrics(*o, io); }};
}

}  // namespace ffusion::cli
