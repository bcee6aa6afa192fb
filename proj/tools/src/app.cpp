// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include <vector>

#include "commands.hpp"
#include "ffusion_cli/cli.hpp"

namespace ffusion::cli {

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frustum fusion of LiDAR scans with stereo pseudo-LiDAR", "ffusion"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);
  const std::vector<Command> commands{add_convert(app),  add_fuse(app),     add_bench(app),
                                      add_synth(app),    add_sparsify(app), add_metrics(app)};

  std::vector<const char*> argv{"ffusion"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInvalid;
  }

  Io io{out, err};
  for (const Command& cmd : commands) {
    if (!cmd.app->parsed()) continue;
    try {
      return cmd.run(io);
    } catch (const std::exception& e) {
      err << cmd.app->get_name() << ": " << e.what() << "\n";
      return kExitInvalid;
    }
  }
  return kExitInvalid;
}

}  // namespace ffusion::cli
