#pragma once

// Command-line driver. Exit codes: 0 success, 2 usage (including an
// unreadable scenario path), 3 parse/validation/assembly, 4 runtime
// singularity (partial output is still written).

#include <iosfwd>
#include <string>
#include <vector>

namespace blockdyn {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInvalid = 3;
inline constexpr int kExitRuntime = 4;

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blockdyn
