#pragma once

#include <iosfwd>

namespace semsnet::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kUsage = 2,
  kDataError = 3,
  kTrainingError = 4,
};

/// Runs `semsnet <command> ...`; never throws. Errors are reported as one
/// line on `err` starting with `error[<kind>]: `.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace semsnet::cli
