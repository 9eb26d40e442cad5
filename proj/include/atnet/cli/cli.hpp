#pragma once

#include <string>
#include <vector>

namespace atnet::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kNumerical = 3 };

/// Entry point behind the `atnet` executable; `args` excludes the program
/// name. Diagnostics go to stderr as a single line.
int run_cli(const std::vector<std::string>& args);

}  // namespace atnet::cli
