// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <chrono>
#include <memory>
#include <optional>
#include <thread>

#include "commands.hpp"
#include "ffusion/disparity_io.hpp"
#include "ffusion/error.hpp"
#include "ffusion/kitti_io.hpp"
#include "ffusion/pseudolidar.hpp"
#include "ffusion_cli/cli.hpp"

namespace ffusion::cli {

namespace {

using Clock = std::chrono::steady_clock;

struct FuseOptions {
  fs::path calib;
  fs::path lidar;
  fs::path disparity;
  fs::path pl;
  fs::path labels;
  fs::path out;
  fs::path report;
  double tau = 0.7;
  std::string per_class_tau;
  std::string mode = "frustum";
  double near = 0.5;
  double far = 80.0;
  float added_intensity = 0.0f;
  double max_depth = 80.0;
  double height_clip = 1.0;
  std::string pl_frame = "camera";
  std::string image_size = "1242x375";
  unsigned threads = 1;
  unsigned workers = 0;
};

struct FrameInputs {
  std::string stem;
  fs::path calib;
  fs::path lidar;
  fs::path disparity;
  fs::path pl;
  fs::path labels;
  fs::path out;
};

struct FrameOutcome {
  bool ok = false;
  json record;
};

FusionConfig make_config(const FuseOptions& o) {
  FusionConfig c;
  c.tau = o.tau;
  c.near = o.near;
  c.far = o.far;
  c.output_mode = parse_output_mode(o.mode);
  c.added_intensity = o.added_intensity;
  if (!o.per_class_tau.empty()) c.per_class_tau = parse_per_class_tau(o.per_class_tau);
  c.threads = std::max(1u, o.threads);
  c.validate();
  return c;
}

json inputs_json(const FrameInputs& f) {
  json j{{"calib", f.calib.string()}, {"lidar", f.lidar.string()}};
  if (!f.disparity.empty()) j["disparity"] = f.disparity.string();
  if (!f.pl.empty()) j["pl"] = f.pl.string();
  j["labels"] = f.labels.empty() ? json(nullptr) : json(f.labels.string());
  return j;
}

json fuse_one(const FrameInputs& f, const FuseOptions& o, const FusionConfig& config) {
  const auto start = Clock::now();
  const CalibBundle bundle = staged("calib", [&] { return read_calib_bundle(f.calib); });

  std::optional<DisparityMap> disp;
  ImageSize image;
  if (!f.disparity.empty()) {
    disp = staged("disparity", [&] { return read_disparity(f.disparity); });
    image = disp->size();
  } else {
    image = parse_image_size(o.image_size);
  }
  const Calibration calib = staged("calib", [&] { return make_calibration(bundle, image); });
  const PointCloud lidar = staged("lidar", [&] { return read_velodyne_bin(f.lidar); });

  PointCloud pl = staged("pl", [&] {
    if (disp) {
      PseudoLidarOptions plo;
      plo.max_depth = o.max_depth;
      plo.height_clip = o.height_clip;
      plo.threads = config.threads;
      return disparity_to_cloud(*disp, calib.rig, plo);
    }
    PointCloud cloud = read_velodyne_bin(f.pl);
    cloud.frame = o.pl_frame == "lidar" ? Frame::Lidar : Frame::LeftCamera;
    cloud.source = CloudSource::PseudoLidar;
    return cloud;
  });

  std::vector<std::string> skipped;
  const std::vector<DetectionPair> detections = staged("labels", [&] {
    if (f.labels.empty()) return std::vector<DetectionPair>{};
    return detections_from_labels(parse_labels(f.labels), calib, &skipped);
  });

  const FusionResult result = staged("fuse", [&] {
    return fuse_frame(lidar, pl, detections, SensorSetup{calib.rig, calib.lidar_to_left, {}},
                      config);
  });
  staged("write", [&] {
    write_atomically(f.out, [&](const fs::path& tmp) { write_velodyne_bin(result.cloud, tmp); });
  });

  json record{{"record", "frame"},
              {"stem", f.stem},
              {"status", "ok"},
              {"inputs", inputs_json(f)},
              {"output", f.out.string()},
              {"skipped_labels", skipped},
              {"report", to_json(result.report)}};
  record["frame_ms"] =
      std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  return record;
}

FrameOutcome process(const FrameInputs& f, const FuseOptions& o, const FusionConfig& config) {
  try {
    return {true, fuse_one(f, o, config)};
  } catch (const StageError& e) {
    return {false, json{{"record", "frame"},
                        {"stem", f.stem},
                        {"status", "failed"},
                        {"inputs", inputs_json(f)},
                        {"stage", e.stage()},
                        {"error", e.what()}}};
  }
}

json run_record(const FuseOptions& o, const FusionConfig& config, std::string_view mode) {
  json cfg = to_json(config);
  cfg["max_depth"] = o.max_depth;
  cfg["height_clip"] = o.height_clip;
  cfg["pl_frame"] = o.pl_frame;
  return {{"record", "run"},
          {"tool", "ffusion"},
          {"version", kToolVersion},
          {"command", "fuse"},
          {"batch", mode == "batch"},
          {"config", std::move(cfg)}};
}

std::optional<fs::path> find_with_extension(const fs::path& dir, const std::string& stem,
                                            std::initializer_list<const char*> extensions) {
  for (const char* ext : extensions) {
    fs::path p = dir / (stem + ext);
    if (fs::is_regular_file(p)) return p;
  }
  return std::nullopt;
}

int run_batch(const FuseOptions& o, const FusionConfig& config, Io io) {
  const auto start = Clock::now();
  for (const fs::path& dir : {o.calib, o.disparity.empty() ? o.pl : o.disparity}) {
    if (!fs::is_directory(dir)) throw Error("batch mode expects directories; " + dir.string() + " is not one");
  }
  if (!o.labels.empty() && !fs::is_directory(o.labels)) {
    throw Error("batch mode expects directories; " + o.labels.string() + " is not one");
  }
  fs::create_directories(o.out);

  std::vector<std::string> stems;
  for (const auto& entry : fs::directory_iterator(o.lidar)) {
    if (entry.is_regular_file() && entry.path().extension() == ".bin") {
      stems.push_back(entry.path().stem().string());
    }
  }
  std::sort(stems.begin(), stems.end());

  std::vector<FrameInputs> frames;
  std::vector<json> unmatched;
  for (const std::string& stem : stems) {
    FrameInputs f{stem, o.calib / (stem + ".txt"), o.lidar / (stem + ".bin"), {}, {}, {},
                  o.out / (stem + ".bin")};
    std::string missing;
    if (!fs::is_regular_file(f.calib)) missing = "calib";
    if (!o.disparity.empty()) {
      if (auto p = find_with_extension(o.disparity, stem, {".png", ".disp"})) {
        f.disparity = *p;
      } else if (missing.empty()) {
        missing = "disparity";
      }
    } else {
      f.pl = o.pl / (stem + ".bin");
      if (!fs::is_regular_file(f.pl) && missing.empty()) missing = "pl";
    }
    if (!o.labels.empty()) {
      f.labels = o.labels / (stem + ".txt");
      if (!fs::is_regular_file(f.labels) && missing.empty()) missing = "labels";
    }
    if (!missing.empty()) {
      io.err << "fuse: " << stem << ": unmatched stem, no " << missing << " file; skipped\n";
      unmatched.push_back({{"record", "frame"},
                           {"stem", stem},
                           {"status", "skipped"},
                           {"stage", "pairing"},
                           {"error", "no " + missing + " file for this stem"}});
      continue;
    }
    frames.push_back(std::move(f));
  }

  std::vector<FrameOutcome> outcomes(frames.size());
  const unsigned workers =
      std::max(1u, std::min<unsigned>(o.workers > 0 ? o.workers : default_workers(),
                                      static_cast<unsigned>(std::max<std::size_t>(1, frames.size()))));
  {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < frames.size(); i = next++) {
          outcomes[i] = process(frames[i], o, config);
        }
      });
    }
  }

  std::vector<json> records{run_record(o, config, "batch")};
  std::size_t ok = 0;
  std::size_t failed = unmatched.size();
  std::size_t u = 0;
  std::size_t k = 0;
  // Merge processed and unmatched frames back into stem order.
  for (const std::string& stem : stems) {
    if (u < unmatched.size() && unmatched[u]["stem"] == stem) {
      records.push_back(unmatched[u++]);
      continue;
    }
    FrameOutcome& outcome = outcomes[k++];
    if (outcome.ok) {
      ++ok;
    } else {
      ++failed;
      io.err << "fuse: " << stem << ": " << outcome.record["error"].get<std::string>() << "\n";
    }
    records.push_back(std::move(outcome.record));
  }
  records.push_back({{"record", "summary"},
                     {"frames", stems.size()},
                     {"ok", ok},
                     {"failed", failed},
                     {"wall_ms", std::chrono::duration<double, std::milli>(Clock::now() - start).count()}});

  const fs::path manifest = o.report.empty() ? o.out / "manifest.jsonl" : o.report;
  staged("manifest", [&] { write_text_atomically(manifest, jsonl(records)); });
  io.out << ok << " of " << stems.size() << " frames fused; manifest " << manifest.string() << "\n";
  if (ok == stems.size() && !stems.empty()) return kExitOk;
  return ok > 0 ? kExitPartial : kExitInvalid;
}

int run_single(const FuseOptions& o, const FusionConfig& config, Io io) {
  const auto start = Clock::now();
  const FrameInputs f{o.lidar.stem().string(), o.calib, o.lidar, o.disparity, o.pl, o.labels, o.out};
  FrameOutcome outcome = process(f, o, config);
  if (!outcome.ok) {
    io.err << "fuse: " << outcome.record["error"].get<std::string>() << "\n";
    return kExitInvalid;
  }
  const json& report = outcome.record["report"];
  for (const json& s : outcome.record["skipped_labels"]) {
    io.err << "fuse: warning: skipped label: " << s.get<std::string>() << "\n";
  }
  io.out << report["output_points"] << " points (" << report["lidar_output"] << " LiDAR + "
         << report["pl_added"] << " added) written to " << o.out.string() << "\n";
  if (!o.report.empty()) {
    std::vector<json> records{run_record(o, config, "single"), outcome.record,
                              {{"record", "summary"},
                               {"frames", 1},
                               {"ok", 1},
                               {"failed", 0},
                               {"wall_ms", std::chrono::duration<double, std::milli>(Clock::now() - start).count()}}};
    staged("manifest", [&] { write_text_atomically(o.report, jsonl(records)); });
  }
  return kExitOk;
}

int run_fuse(const FuseOptions& o, Io io) {
  const FusionConfig config = staged("config", [&] { return make_config(o); });
  if (o.disparity.empty() == o.pl.empty()) {
    throw StageError("config", "give exactly one of --disparity and --pl");
  }
  if (o.pl_frame != "camera" && o.pl_frame != "lidar") {
    throw StageError("config", "--pl-frame must be 'camera' or 'lidar'");
  }
  staged("config", [&] { parse_image_size(o.image_size); });
  if (fs::is_directory(o.lidar)) return run_batch(o, config, io);
  return run_single(o, config, io);
}

}  // namespace

Command add_fuse(CLI::App& parent) {
  auto o = std::make_shared<FuseOptions>();
  CLI::App* sub = parent.add_subcommand(
      "fuse", "Fuse a LiDAR scan with pseudo-LiDAR inside the stereo detection frustums");
  sub->add_option("--calib", o->calib, "Calibration file, or directory in batch mode")->required();
  sub->add_option("--lidar", o->lidar, "LiDAR scan binary, or directory for batch mode")->required();
  auto* disp = sub->add_option("--disparity", o->disparity, "Disparity map or directory");
  auto* pl = sub->add_option("--pl", o->pl, "Pseudo-LiDAR scan binary or directory");
  disp->excludes(pl);
  sub->add_option("--labels", o->labels, "Label file or directory; omitted means no detections");
  sub->add_option("--out", o->out, "Output scan binary, or directory in batch mode")->required();
  sub->add_option("--report", o->report, "Manifest (JSON lines) path");
  sub->add_option("--tau", o->tau, "Distance threshold (m)")->capture_default_str();
  sub->add_option("--per-class-tau", o->per_class_tau,
                  "'default' or Class=tau list, e.g. Car=0.6,Cyclist=0.9");
  sub->add_option("--mode", o->mode, "Output: frustum or scene")->capture_default_str();
  sub->add_option("--near", o->near, "Near clip plane (m)")->capture_default_str();
  sub->add_option("--far", o->far, "Far clip plane (m)")->capture_default_str();
  sub->add_option("--added-intensity", o->added_intensity, "Intensity of added points")
      ->capture_default_str();
  sub->add_option("--max-depth", o->max_depth, "Pseudo-LiDAR depth limit (m)")->capture_default_str();
  sub->add_option("--height-clip", o->height_clip, "Pseudo-LiDAR height limit above camera (m)")
      ->capture_default_str();
  sub->add_option("--pl-frame", o->pl_frame, "Frame of --pl scans: camera or lidar")
      ->capture_default_str();
  sub->add_option("--image-size", o->image_size, "Image size used with --pl")->capture_default_str();
  sub->add_option("--threads", o->threads, "Threads per frame")->capture_default_str();
  sub->add_option("--workers", o->workers, "Concurrent frames in batch mode (default: FFUSION_WORKERS or cores)");
  return {sub, [o](Io io) { return run_fuse(*o, io); }};
}

}  // namespace ffusion::cli
