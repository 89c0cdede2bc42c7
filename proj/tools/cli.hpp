#pragma once

#include <ostream>

namespace liprint::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kSimulatedFailure = 2,
};

/// Entry point of the `liprint` tool; `out` receives data and summaries, `err` diagnostics.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace liprint::cli
