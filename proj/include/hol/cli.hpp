#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hol::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kSolverWarning = 3,
  kPartialFailure = 4,
};

// Entry point shared by the executable and the tests.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hol::cli
