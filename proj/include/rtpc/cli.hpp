#pragma once

#include <iosfwd>

namespace rtpc::cli {

/// Usage errors (bad or missing flags) exit with this code; library errors
/// exit with their ErrorCode value; anything unexpected exits with 1.
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInternal = 1;

/// Entry point of the `rtpc` tool. Messages go to `out` and `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rtpc::cli
