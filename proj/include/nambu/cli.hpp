#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nambu {

// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailed = 1,        // verification failed, resonance found, input not co-Nambu
  kExitInput = 2,         // malformed input or options
  kExitPrecondition = 3,  // mathematical precondition unmet
  kExitSolve = 4,         // graded solve inconsistent or internal failure
};

// Runs the tool on `args` (without the program name). Reports go to `out`,
// diagnostics to `err`; "-" as input path reads `in`.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace nambu
