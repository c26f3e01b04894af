#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace larch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

/// Runs the command-line tool. `args` excludes the program name. Returns the process
/// exit code: 0 on success, 1 on a usage error, 2 on a numeric or domain error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace larch::cli
