#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace monoseq::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime, data, I/O, or version errors
inline constexpr int kExitUsage = 2;

/// Runs one invocation. `args` excludes the program name, e.g.
/// {"train", "--kind", "pcrf", ...}. Diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string_view tool_version();

}  // namespace monoseq::cli
