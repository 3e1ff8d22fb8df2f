#pragma once

#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace sbp::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2 };

/// Entry point of the `sbp` tool. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sbp::cli
