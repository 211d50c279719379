#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pedscan::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadArguments = 2;
inline constexpr int kExitFormatError = 3;
inline constexpr int kExitVersionMismatch = 4;

/// Runs `pedscan <args...>` (args exclude the program name) and returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pedscan::cli
