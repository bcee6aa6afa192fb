// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_CLI_COMMON_HPP
#define FFUSION_CLI_COMMON_HPP

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ffusion/fusion.hpp"
#include "ffusion/geometry.hpp"

namespace ffusion::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

inline constexpr std::string_view kToolVersion = FFUSION_VERSION;

struct Io {
  std::ostream& out;
  std::ostream& err;
};

/// A failure attributed to one pipeline stage ("calib", "lidar", ...).
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& message)
      : std::runtime_error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <class F>
decltype(auto) staged(std::string_view stage, F&& f) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(std::string(stage), e.what());
  }
}

/// Writes through `write` into a sibling temp file, then renames it over
/// `target`. The temp file is removed on failure.
void write_atomically(const fs::path& target, const std::function<void(const fs::path&)>& write);
void write_text_atomically(const fs::path& target, std::string_view text);

/// "WIDTHxHEIGHT".
ImageSize parse_image_size(std::string_view text);

/// "default" for the best per-class values, or "Car=0.6,Cyclist=0.9,...".
std::map<ObjectClass, double> parse_per_class_tau(std::string_view text);

OutputMode parse_output_mode(std::string_view text);

/// FFUSION_WORKERS when set, else the hardware thread count.
unsigned default_workers();

json to_json(const FusionReport& report, bool timings = true);
json to_json(const FusionConfig& config);

std::string jsonl(const std::vector<json>& records);

}  // namespace ffusion::cli

#endif  // FFUSION_CLI_COMMON_HPP
