// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <memory>

#include "commands.hpp"
#include "ffusion/disparity_io.hpp"
#include "ffusion/error.hpp"
#include "ffusion/kitti_io.hpp"
#include "ffusion/synth.hpp"
#include "ffusion_cli/cli.hpp"

namespace ffusion::cli {

namespace {

struct SynthOptions {
  std::uint64_t seed = 0;
  unsigned count = 1;
  fs::path spec;
  fs::path out_dir;
  std::string disparity_format = "raw";
};

std::string stem_for(std::uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(seed));
  return buf;
}

int run_synth(const SynthOptions& o, Io io) {
  if (o.disparity_format != "raw" && o.disparity_format != "png") {
    throw Error("--disparity-format must be 'raw' or 'png'");
  }
  const SceneSpec spec =
      o.spec.empty() ? SceneSpec{} : staged("spec", [&] { return parse_scene_spec(o.spec); });
  for (const char* sub : {"calib", "velodyne", "disparity", "label_2"}) {
    fs::create_directories(o.out_dir / sub);
  }
  for (unsigned i = 0; i < o.count; ++i) {
    const std::uint64_t seed = o.seed + i;
    const std::string stem = stem_for(seed);
    const SyntheticScene scene = staged("generate", [&] { return generate_scene(seed, spec); });
    staged("write", [&] {
      write_atomically(o.out_dir / "calib" / (stem + ".txt"),
                       [&](const fs::path& tmp) { write_calib(scene.calib.raw, tmp); });
      write_atomically(o.out_dir / "velodyne" / (stem + ".bin"),
                       [&](const fs::path& tmp) { write_velodyne_bin(scene.lidar, tmp); });
      if (o.disparity_format == "png") {
        write_atomically(o.out_dir / "disparity" / (stem + ".png"),
                         [&](const fs::path& tmp) { write_disparity_png(scene.disparity, tmp); });
      } else {
        write_atomically(o.out_dir / "disparity" / (stem + ".disp"),
                         [&](const fs::path& tmp) { write_disparity_raw(scene.disparity, tmp); });
      }
      write_atomically(o.out_dir / "label_2" / (stem + ".txt"),
                       [&](const fs::path& tmp) { write_labels(scene.objects, tmp); });
    });
    io.out << stem << ": " << scene.lidar.size() << " LiDAR points, "
           << scene.disparity.valid_count() << " disparity pixels, " << scene.objects.size()
           << " objects\n";
  }
  return kExitOk;
}

}  // namespace

Command add_synth(CLI::App& parent) {
  auto o = std::make_shared<SynthOptions>();
  CLI::App* sub = parent.add_subcommand(
      "synth", "Write synthetic frames (calib, velodyne, disparity, label_2) for fuse");
  sub->add_option("--seed", o->seed, "Seed of the first frame")->capture_default_str();
  sub->add_option("--count", o->count, "Number of frames, seeds seed..seed+count-1")
      ->capture_default_str();
  sub->add_option("--spec", o->spec, "Scene spec (key = value lines)");
  sub->add_option("--out-dir", o->out_dir, "Output directory")->required();
  sub->add_option("--disparity-format", o->disparity_format, "raw or png")->capture_default_str();
  return {sub, [o](Io io) { return run_synth(*o, io); }};
}

}  // namespace ffusion::cli
