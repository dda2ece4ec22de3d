#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cforge {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitInconsistent = 2, kExitBlowUp = 3, kExitCheckFailed = 4 };

// Runs one command line (args[0] is the program name).  Reports go to the
// --output file or to out; diagnostics go to err.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cforge
