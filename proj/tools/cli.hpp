#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ifr::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kInfeasible = 2,
    kNonConvergence = 3,
    kEnvelopeViolation = 4,
};

/// Runs the command line `args` (without the program name). Results go to `out` or to the
/// --output file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ifr::cli
