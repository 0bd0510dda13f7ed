#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace stairkit::cli {

inline constexpr std::string_view kVersion = "1.0.0";

/// Exit status: 0 success, 1 domain error, 2 usage error.
enum ExitCode : int { kOk = 0, kDomainError = 1, kUsageError = 2 };

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stairkit::cli
