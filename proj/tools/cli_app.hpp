#pragma once

#include <string>
#include <vector>

namespace fspec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnomaly = 1;
inline constexpr int kExitInput = 2;

inline constexpr const char* kToolVersion = "0.1.0";

/// Runs one command line (args excludes the program name). Diagnostics go to
/// stderr, results to files under --out.
int run(const std::vector<std::string>& args);

}  // namespace fspec::cli
