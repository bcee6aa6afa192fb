// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "ffusion/disparity_io.hpp"
#include "ffusion/kitti_io.hpp"
#include "ffusion/pseudolidar.hpp"
#include "ffusion_cli/cli.hpp"
#include "support/oracles.hpp"

namespace ffusion {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result ffusion_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<json> read_jsonl(const fs::path& p) {
  std::vector<json> out;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

void strip_timings(json& j) {
  if (j.is_object()) {
    j.erase("timing_ms");
    j.erase("frame_ms");
    j.erase("wall_ms");
    for (auto& [k, v] : j.items()) strip_timings(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_timings(v);
  }
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("ffusion_cli_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path synth(std::uint64_t seed, unsigned count = 1, const std::string& name = "data") {
    const fs::path out = dir_ / name;
    const Result r = ffusion_run({"synth", "--seed", std::to_string(seed), "--count",
                                  std::to_string(count), "--out-dir", out.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    return out;
  }

  fs::path dir_;
};

TEST_F(Cli, HelpAndBadInvocation) {
  EXPECT_EQ(ffusion_run({"--help"}).code, 0);
  EXPECT_EQ(ffusion_run({}).code, 2);
  EXPECT_EQ(ffusion_run({"nonsense"}).code, 2);
  EXPECT_EQ(ffusion_run({"fuse", "--tau", "-1"}).code, 2);
}

TEST_F(Cli, ConvertWritesSixteenBytesPerPoint) {
  const fs::path data = synth(3);
  const fs::path out = dir_ / "pl.bin";
  const Result r = ffusion_run({"convert", "--calib", (data / "calib/000003.txt").string(),
                                "--disparity", (data / "disparity/000003.disp").string(), "--out",
                                out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::size_t n = std::stoul(r.out);
  EXPECT_GT(n, 0u);
  EXPECT_EQ(fs::file_size(out), 16 * n);
}

TEST_F(Cli, ConvertMissingCalibNamesPath) {
  const fs::path data = synth(3);
  const fs::path missing = dir_ / "no_such_calib.txt";
  const Result r = ffusion_run({"convert", "--calib", missing.string(), "--disparity",
                                (data / "disparity/000003.disp").string(), "--out",
                                (dir_ / "x.bin").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(missing.string()), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("calib"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "x.bin"));
}

TEST_F(Cli, ConvertEmptyDisparityWarns) {
  const fs::path data = synth(3);
  write_disparity_raw(DisparityMap(1242, 375), dir_ / "empty.disp");
  const Result r = ffusion_run({"convert", "--calib", (data / "calib/000003.txt").string(),
                                "--disparity", (dir_ / "empty.disp").string(), "--out",
                                (dir_ / "pl.bin").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(fs::file_size(dir_ / "pl.bin"), 0u);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

std::vector<std::string> fuse_args(const fs::path& data, const std::string& stem,
                                   const fs::path& out) {
  return {"fuse",
          "--calib", (data / "calib" / (stem + ".txt")).string(),
          "--lidar", (data / "velodyne" / (stem + ".bin")).string(),
          "--disparity", (data / "disparity" / (stem + ".disp")).string(),
          "--labels", (data / "label_2" / (stem + ".txt")).string(),
          "--out", out.string()};
}

TEST_F(Cli, FuseTauZeroAddsEveryIntersectionPoint) {
  const fs::path data = synth(5);
  auto args = fuse_args(data, "000005", dir_ / "fused.bin");
  args.insert(args.end(), {"--tau", "0", "--report", (dir_ / "m.jsonl").string()});
  const Result r = ffusion_run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const std::vector<json> m = read_jsonl(dir_ / "m.jsonl");
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0]["record"], "run");
  const json& dets = m[1]["report"]["detections"];
  ASSERT_FALSE(dets.empty());
  for (const json& d : dets) EXPECT_EQ(d["pl_added"], d["pl_in_intersection"]);
  EXPECT_EQ(m[2]["ok"], 1);
}

TEST_F(Cli, FuseSceneModeWithoutLabelsCopiesLidar) {
  const fs::path data = synth(6);
  const fs::path out = dir_ / "fused.bin";
  const Result r = ffusion_run({"fuse", "--calib", (data / "calib/000006.txt").string(), "--lidar",
                                (data / "velodyne/000006.bin").string(), "--disparity",
                                (data / "disparity/000006.disp").string(), "--mode", "scene",
                                "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(out), slurp(data / "velodyne/000006.bin"));
}

TEST_F(Cli, FuseMatchesBruteForceReference) {
  const fs::path data = synth(7);
  const std::string stem = "000007";
  auto args = fuse_args(data, stem, dir_ / "fused.bin");
  args.insert(args.end(), {"--tau", "0.7"});
  const Result r = ffusion_run(args);
  ASSERT_EQ(r.code, 0) << r.err;

  const DisparityMap disp = read_disparity(data / "disparity" / (stem + ".disp"));
  const Calibration calib = parse_calib(data / "calib" / (stem + ".txt"), disp.size());
  const PointCloud lidar = read_velodyne_bin(data / "velodyne" / (stem + ".bin"));
  const PointCloud pl = disparity_to_cloud(disp, calib.rig);
  const auto dets = detections_from_labels(parse_labels(data / "label_2" / (stem + ".txt")), calib);
  ASSERT_FALSE(dets.empty());

  std::vector<Point3> lidar_left;
  for (const Point3& p : lidar.points) lidar_left.push_back(calib.lidar_to_left.apply(p));
  const auto intr = oracle::plain(calib.rig.left());
  std::set<std::size_t> added;
  std::set<std::size_t> kept;
  for (const DetectionPair& d : dets) {
    for (std::size_t i : oracle::fuse_detection(lidar_left, pl.points, intr, intr,
                                                calib.rig.baseline(), d, 0.5, 80.0, 0.7)) {
      added.insert(i);
    }
    for (std::size_t i = 0; i < lidar_left.size(); ++i) {
      if (oracle::in_stereo_frustums(lidar_left[i], intr, intr, calib.rig.baseline(), d.left_box,
                                     d.right_box, 0.5, 80.0)) {
        kept.insert(i);
      }
    }
  }
  ASSERT_FALSE(added.empty());

  const PointCloud fused = read_velodyne_bin(dir_ / "fused.bin");
  ASSERT_EQ(fused.size(), kept.size() + added.size());
  std::size_t k = kept.size();
  for (std::size_t i : added) {
    const Point3 expected = calib.lidar_to_left.inverse().apply(pl.points[i]);
    EXPECT_LT((fused.points[k++] - expected).norm(), 1e-4);
  }
}

TEST_F(Cli, BatchModeIsDeterministicAcrossWorkerCounts) {
  const fs::path data = synth(20, 4);
  auto batch = [&](const std::string& out, const std::string& workers) {
    return ffusion_run({"fuse", "--calib", (data / "calib").string(), "--lidar",
                        (data / "velodyne").string(), "--disparity", (data / "disparity").string(),
                        "--labels", (data / "label_2").string(), "--out", (dir_ / out).string(),
                        "--workers", workers, "--threads", workers});
  };
  const Result one = batch("one", "1");
  const Result three = batch("three", "3");
  ASSERT_EQ(one.code, 0) << one.err;
  ASSERT_EQ(three.code, 0) << three.err;
  for (int s = 20; s < 24; ++s) {
    const std::string name = "0000" + std::to_string(s) + ".bin";
    EXPECT_EQ(slurp(dir_ / "one" / name), slurp(dir_ / "three" / name)) << name;
  }
  std::vector<json> a = read_jsonl(dir_ / "one/manifest.jsonl");
  std::vector<json> b = read_jsonl(dir_ / "three/manifest.jsonl");
  ASSERT_EQ(a.size(), 6u);
  for (auto* m : {&a, &b}) {
    for (json& rec : *m) {
      strip_timings(rec);
      if (rec.contains("output")) rec["output"] = fs::path(rec["output"].get<std::string>()).filename();
    }
  }
  EXPECT_EQ(a, b);
}

TEST_F(Cli, BatchModeReportsPartialAndTotalFailure) {
  const fs::path data = synth(30, 3);
  fs::remove(data / "label_2/000031.txt");
  {
    std::ofstream(data / "velodyne/000032.bin", std::ios::app) << "xyz";
  }
  setenv("FFUSION_WORKERS", "2", 1);
  const Result partial = ffusion_run({"fuse", "--calib", (data / "calib").string(), "--lidar",
                                      (data / "velodyne").string(), "--disparity",
                                      (data / "disparity").string(), "--labels",
                                      (data / "label_2").string(), "--out", (dir_ / "out").string()});
  unsetenv("FFUSION_WORKERS");
  EXPECT_EQ(partial.code, 1) << partial.err;
  const std::vector<json> m = read_jsonl(dir_ / "out/manifest.jsonl");
  ASSERT_EQ(m.size(), 5u);
  EXPECT_EQ(m[1]["status"], "ok");
  EXPECT_EQ(m[2]["status"], "skipped");
  EXPECT_EQ(m[3]["status"], "failed");
  EXPECT_EQ(m[3]["stage"], "lidar");
  EXPECT_EQ(m[4]["ok"], 1);
  EXPECT_EQ(m[4]["failed"], 2);
  EXPECT_TRUE(fs::exists(dir_ / "out/000030.bin"));
  EXPECT_FALSE(fs::exists(dir_ / "out/000032.bin"));

  fs::remove(data / "velodyne/000030.bin");
  const Result total = ffusion_run({"fuse", "--calib", (data / "calib").string(), "--lidar",
                                    (data / "velodyne").string(), "--disparity",
                                    (data / "disparity").string(), "--labels",
                                    (data / "label_2").string(), "--out", (dir_ / "out2").string()});
  EXPECT_EQ(total.code, 2);
}

TEST_F(Cli, PerClassTauDefaultAppliesBestValues) {
  const fs::path data = synth(8);
  auto args = fuse_args(data, "000008", dir_ / "fused.bin");
  args.insert(args.end(), {"--tau", "0", "--per-class-tau", "default", "--report",
                           (dir_ / "m.jsonl").string()});
  ASSERT_EQ(ffusion_run(args).code, 0);
  for (const json& d : read_jsonl(dir_ / "m.jsonl")[1]["report"]["detections"]) {
    const std::string cls = d["class"];
    const double tau = d["tau"];
    EXPECT_EQ(tau, cls == "Car" ? 0.6 : cls == "Cyclist" ? 0.9 : 0.7);
  }
  auto bad = fuse_args(data, "000008", dir_ / "x.bin");
  bad.insert(bad.end(), {"--per-class-tau", "Truck=1"});
  EXPECT_EQ(ffusion_run(bad).code, 2);
}

TEST_F(Cli, SynthIsByteReproducible) {
  const fs::path a = synth(9, 1, "a");
  const fs::path b = synth(9, 1, "b");
  for (const char* f : {"calib/000009.txt", "velodyne/000009.bin", "disparity/000009.disp",
                        "label_2/000009.txt"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_GT(fs::file_size(a / f), 0u) << f;
  }
}

TEST_F(Cli, SynthWithoutObjectsWritesEmptyLabels) {
  {
    std::ofstream(dir_ / "empty.spec") << "random_objects = 0\n";
  }
  const Result r = ffusion_run({"synth", "--seed", "1", "--spec", (dir_ / "empty.spec").string(),
                                "--out-dir", (dir_ / "d").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(fs::file_size(dir_ / "d/label_2/000001.txt"), 0u);
}

TEST_F(Cli, BenchIndexWorkload) {
  EXPECT_EQ(ffusion_run({"bench", "--points", "0"}).code, 2);
  const std::vector<std::string> args{"bench", "--points", "20000", "--queries", "500", "--json"};
  const Result a = ffusion_run(args);
  const Result b = ffusion_run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  const json ja = json::parse(a.out), jb = json::parse(b.out);
  EXPECT_EQ(ja["oracle_mismatches"], 0);
  EXPECT_EQ(ja["mean_nodes_visited"], jb["mean_nodes_visited"]);
  EXPECT_EQ(ja["checksum"], jb["checksum"]);
}

TEST_F(Cli, BenchFusionWorkload) {
  const Result r = ffusion_run({"bench", "--workload", "fusion", "--points", "5000",
                                "--pl-points", "10000", "--detections", "4", "--json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["oracle_mismatches"], 0);
  EXPECT_GT(j["pl_added"].get<int>(), 0);
}

TEST_F(Cli, SparsifyAndMetrics) {
  const fs::path data = synth(10);
  ASSERT_EQ(ffusion_run({"convert", "--calib", (data / "calib/000010.txt").string(), "--disparity",
                         (data / "disparity/000010.disp").string(), "--out",
                         (dir_ / "pl.bin").string()})
                .code,
            0);
  const Result s = ffusion_run({"sparsify", "--pl", (dir_ / "pl.bin").string(), "--out",
                                (dir_ / "sparse.bin").string()});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_LT(fs::file_size(dir_ / "sparse.bin"), fs::file_size(dir_ / "pl.bin"));

  const Result m = ffusion_run({"metrics", "--calib", (data / "calib/000010.txt").string(),
                                "--labels", (data / "label_2/000010.txt").string(), "--cloud",
                                (data / "velodyne/000010.bin").string(), "--margin", "0.1"});
  ASSERT_EQ(m.code, 0) << m.err;
  std::istringstream lines(m.out);
  std::size_t records = 0;
  for (std::string line; std::getline(lines, line); ++records) {
    const json j = json::parse(line);
    EXPECT_GT(j["count"].get<int>(), 0);
  }
  EXPECT_EQ(records, parse_labels(data / "label_2/000010.txt").size());
}

}  // namespace
}  // namespace ffusion
