#pragma once

#include <iosfwd>

namespace rds {

// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitResource = 2;
inline constexpr int kExitInternal = 3;
inline constexpr int kExitCheckFailed = 4;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rds
