#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sepsis::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kDataError = 3,
  kConfigError = 4,
  kInternalError = 5,
};

// Runs one command line (without the program name). Diagnostics go to `err`,
// reports to `out`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sepsis::cli
