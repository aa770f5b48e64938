#pragma once

// Command-line front end as a library call so tests can drive it in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace nrange::cli {

enum ExitCode : int { kOk = 0, kInputError = 1, kNumericError = 2 };

/// args excludes the program name. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nrange::cli
