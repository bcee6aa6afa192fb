// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include "common.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include "ffusion/error.hpp"
#include "ffusion/parallel.hpp"

namespace ffusion::cli {

namespace {

double parse_double(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw Error("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

void write_atomically(const fs::path& target, const std::function<void(const fs::path&)>& write) {
  fs::path tmp = target;
  tmp.replace_filename("." + target.filename().string() + ".tmp");
  try {
    write(tmp);
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw;
  }
}

void write_text_atomically(const fs::path& target, std::string_view text) {
  write_atomically(target, [&](const fs::path& tmp) {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("short write to " + tmp.string());
  });
}

ImageSize parse_image_size(std::string_view text) {
  const auto x = text.find('x');
  if (x == std::string_view::npos) throw Error("image size must look like 1242x375");
  const double w = parse_double(text.substr(0, x), "image width");
  const double h = parse_double(text.substr(x + 1), "image height");
  if (w < 1 || h < 1 || w != static_cast<int>(w) || h != static_cast<int>(h)) {
    throw Error("image size must be two positive integers");
  }
  return {static_cast<int>(w), static_cast<int>(h)};
}

std::map<ObjectClass, double> parse_per_class_tau(std::string_view text) {
  if (text == "default") return best_class_tau();
  std::map<ObjectClass, double> out;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const std::string_view item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw Error("per-class tau entries look like Car=0.6");
    const auto cls = parse_object_class(item.substr(0, eq));
    if (!cls) throw Error("unknown class '" + std::string(item.substr(0, eq)) + "'");
    const double tau = parse_double(item.substr(eq + 1), "tau");
    if (!(tau >= 0.0)) throw Error("per-class tau must be >= 0");
    out[*cls] = tau;
  }
  if (out.empty()) throw Error("per-class tau is empty");
  return out;
}

OutputMode parse_output_mode(std::string_view text) {
  if (text == "frustum") return OutputMode::FrustumOnly;
  if (text == "scene") return OutputMode::FullScene;
  throw Error("mode must be 'frustum' or 'scene'");
}

unsigned default_workers() {
  if (const char* env = std::getenv("FFUSION_WORKERS"); env != nullptr && *env != '\0') {
    unsigned value = 0;
    const std::string_view text(env);
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec == std::errc{} && ptr == text.data() + text.size() && value > 0) return value;
    throw Error("FFUSION_WORKERS must be a positive integer");
  }
  return hardware_threads();
}

json to_json(const FusionReport& report, bool timings) {
  json dets = json::array();
  for (const DetectionReport& d : report.detections) {
    dets.push_back({{"class", to_string(d.class_label)},
                    {"tau", d.tau},
                    {"lidar_in_intersection", d.lidar_in_intersection},
                    {"pl_in_intersection", d.pl_in_intersection},
                    {"pl_added", d.pl_added}});
  }
  json j{{"lidar_input", report.lidar_input},
         {"pl_input", report.pl_input},
         {"lidar_output", report.lidar_output},
         {"pl_added", report.pl_added},
         {"output_points", report.output_points},
         {"detections", std::move(dets)}};
  if (timings) {
    j["timing_ms"] = {{"transform", report.timing.transform_ms},
                      {"extract", report.timing.extract_ms},
                      {"fuse", report.timing.fuse_ms},
                      {"merge", report.timing.merge_ms}};
  }
  return j;
}

json to_json(const FusionConfig& config) {
  json per_class = nullptr;
  if (config.per_class_tau) {
    per_class = json::object();
    for (const auto& [cls, tau] : *config.per_class_tau) per_class[std::string(to_string(cls))] = tau;
  }
  return {{"tau", config.tau},
          {"per_class_tau", std::move(per_class)},
          {"mode", to_string(config.output_mode)},
          {"near", config.near},
          {"far", config.far},
          {"added_intensity", config.added_intensity}};
}

std::string jsonl(const std::vector<json>& records) {
  std::string out;
  for (const json& r : records) {
    out += r.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace ffusion::cli
