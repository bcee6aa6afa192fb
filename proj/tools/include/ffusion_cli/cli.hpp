// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_CLI_CLI_HPP
#define FFUSION_CLI_CLI_HPP

#include <ostream>
#include <span>
#include <string>

namespace ffusion::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPartial = 1;  // batch run with some failed frames
inline constexpr int kExitInvalid = 2;  // bad invocation, bad inputs, or every frame failed

/// Runs the tool. `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ffusion::cli

#endif  // FFUSION_CLI_CLI_HPP
