#pragma once

// Command-line front end: solve, compile, simulate and plot.

#include <iosfwd>

namespace pmono {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitNonConvergence = 2;

/// Runs one command. Diagnostics go to `err`; CSV without --out goes to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pmono
