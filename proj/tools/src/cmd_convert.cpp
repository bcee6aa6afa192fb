// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <memory>

#include "commands.hpp"
#include "ffusion/disparity_io.hpp"
#include "ffusion/kitti_io.hpp"
#include "ffusion/pseudolidar.hpp"
#include "ffusion_cli/cli.hpp"

namespace ffusion::cli {

namespace {

struct ConvertOptions {
  fs::path calib;
  fs::path disparity;
  fs::path out;
  PseudoLidarOptions pl;
};

int run_convert(const ConvertOptions& o, Io io) {
  const CalibBundle bundle = staged("calib", [&] { return read_calib_bundle(o.calib); });
  const DisparityMap disp = staged("disparity", [&] { return read_disparity(o.disparity); });
  const Calibration calib =
      staged("calib", [&] { return make_calibration(bundle, disp.size()); });
  const PointCloud cloud =
      staged("convert", [&] { return disparity_to_cloud(disp, calib.rig, o.pl); });
  if (disp.valid_count() == 0) {
    io.err << "convert: warning: " << o.disparity.string()
           << " has no valid disparity pixels; writing an empty cloud\n";
  }
  staged("write", [&] {
    write_atomically(o.out, [&](const fs::path& tmp) { write_velodyne_bin(cloud, tmp); });
  });
  io.out << cloud.size() << " points written to " << o.out.string() << "\n";
  return kExitOk;
}

}  // namespace

Command add_convert(CLI::App& parent) {
  auto o = std::make_shared<ConvertOptions>();
  CLI::App* sub = parent.add_subcommand("convert", "Back-project a disparity map to a pseudo-LiDAR scan");
  sub->add_option("--calib", o->calib, "Calibration file")->required();
  sub->add_option("--disparity", o->disparity, "Disparity map (.png or raw)")->required();
  sub->add_option("--out", o->out, "Output scan binary")->required();
  sub->add_option("--max-depth", o->pl.max_depth, "Drop points beyond this depth (m)")
      ->capture_default_str();
  sub->add_option("--height-clip", o->pl.height_clip,
                  "Drop points more than this far above the camera (m)")
      ->capture_default_str();
  sub->add_option("--intensity", o->pl.intensity, "Intensity written for every point")
      ->capture_default_str();
  sub->add_option("--threads", o->pl.threads, "Worker threads")->capture_default_str();
  return {sub, [o](Io io) { return run_convert(*o, io); }};
}

}  // namespace ffusion::cli
