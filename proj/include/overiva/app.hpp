#pragma once

// Command-line front end. Subcommands: separate, make-mix, bench.

#include <ostream>

namespace overiva {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;
inline constexpr int kExitNumerical = 4;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace overiva
