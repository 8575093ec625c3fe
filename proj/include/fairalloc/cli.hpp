#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fairalloc {

enum ExitCode : int {
  kExitPass = 0,
  kExitBoundFailed = 1,
  kExitInputError = 2,
  kExitNoConvergence = 3,
};

/// Entry point of the `fairalloc` executable. args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fairalloc
