#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dirmap {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;

/// Runs one command line (args excludes the program name). Data goes to out,
/// diagnostics to err. Returns 0, 2 for usage errors or 3 for data and I/O
/// errors.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dirmap
