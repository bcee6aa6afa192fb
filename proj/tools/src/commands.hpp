// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_CLI_COMMANDS_HPP
#define FFUSION_CLI_COMMANDS_HPP

#include <functional>

#include <CLI11.hpp>

#include "common.hpp"

namespace ffusion::cli {

struct Command {
  CLI::App* app = nullptr;
  std::function<int(Io)> run;
};

Command add_convert(CLI::App& parent);
Command add_fuse(CLI::App& parent);
Command add_bench(CLI::App& parent);
Command add_synth(CLI::App& parent);
Command add_sparsify(CLI::App& parent);
Command add_metrics(CLI::App& parent);

}  // namespace ffusion::cli

#endif  // FFUSION_CLI_COMMANDS_HPP
