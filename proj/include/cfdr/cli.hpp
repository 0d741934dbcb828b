#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cfdr {

// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Entry point for the `cfdr` tool; `args` excludes the program name.
// Subcommands: bench, interpret, curve, report. Every subcommand accepts
// `--config <json>` whose keys mirror the long flag names; flags given on the
// command line win over the file.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cfdr
