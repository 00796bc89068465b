#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace spiralnet::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,  // unexpected internal error
  kUsage = 2,
  kIo = 3,
  kValidation = 4,
  kNumeric = 5,
};

/// Runs one invocation. `args` excludes the program name. Results go to
/// `out`; failures print a single diagnostic line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spiralnet::cli
