#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace loadshare {

/// Process exit codes of the `loadshare` tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitDataError = 1,
    kExitUsageError = 2,
    kExitVerificationFailed = 3,
};

/// Runs the command line `args` (args[0] is the program name). The requested
/// artifact goes to `out`; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace loadshare
