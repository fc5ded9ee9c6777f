#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pcstream::cli {

enum ExitCode : int { Ok = 0, VerifyFailed = 1, UsageError = 2 };

/// Runs one command. `args` excludes the program name. Reports go to `out`,
/// diagnostics to `err`; data files go wherever --out and friends point.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pcstream::cli
