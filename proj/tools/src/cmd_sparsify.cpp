// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <memory>

#include "commands.hpp"
#include "ffusion/kitti_io.hpp"
#include "ffusion/pseudolidar.hpp"
#include "ffusion_cli/cli.hpp"

namespace ffusion::cli {

namespace {

struct SparsifyCliOptions {
  fs::path pl;
  fs::path out;
  SparsifyOptions sparsify;
};

int run_sparsify(const SparsifyCliOptions& o, Io io) {
  PointCloud cloud = staged("pl", [&] { return read_velodyne_bin(o.pl); });
  cloud.frame = Frame::LeftCamera;
  cloud.source = CloudSource::PseudoLidar;
  const PointCloud sparse = staged("sparsify", [&] { return sparsify_like_lidar(cloud, o.sparsify); });
  staged("write", [&] {
    write_atomically(o.out, [&](const fs::path& tmp) { write_velodyne_bin(sparse, tmp); });
  });
  io.out << sparse.size() << " of " << cloud.size() << " points kept in " << o.out.string() << "\n";
  return kExitOk;
}

}  // namespace

Command add_sparsify(CLI::App& parent) {
  auto o = std::make_shared<SparsifyCliOptions>();
  CLI::App* sub = parent.add_subcommand(
      "sparsify", "Filter a camera-frame pseudo-LiDAR scan down to a LiDAR-like beam pattern");
  sub->add_option("--pl", o->pl, "Pseudo-LiDAR scan binary in the left camera frame")->required();
  sub->add_option("--out", o->out, "Output scan binary")->required();
  sub->add_option("--beams", o->sparsify.beams, "Number of elevation beams")->capture_default_str();
  sub->add_option("--azimuth-res", o->sparsify.azimuth_resolution_deg,
                  "Azimuth resolution (degrees)")
      ->capture_default_str();
  return {sub, [o](Io io) { return run_sparsify(*o, io); }};
}

}  // namespace ffusion::cli
