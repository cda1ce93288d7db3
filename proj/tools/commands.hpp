#pragma once

#include <ostream>

namespace msis::cli {

// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kConfigFailure = 1;
inline constexpr int kUsageError = 2;
inline constexpr int kCheckFailed = 3;
inline constexpr int kRuntimeFailure = 4;

/// Parses argv (argv[0] is the program name) and runs one subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace msis::cli
