#pragma once

#include <ostream>

namespace lerw {

enum ExitCode : int { kExitOk = 0, kExitVerifyFailed = 1, kExitUsage = 2, kExitCapacity = 3 };

// Entry point of the `lerw` tool; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace lerw
