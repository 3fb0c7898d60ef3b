#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eventea::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kDivergence = 3 };

/// Runs the command line `args` (args[0] is the program name). Normal output
/// goes to `out`, diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eventea::cli
