#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace squirrels {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitFailure = 2;

/// Subcommands simulate, reconstruct, rates, multiplier and analyze.
/// Returns 0 on success, 1 on usage errors and 2 on runtime failures.
int cli_main(int argc, const char* const* argv);
/// args[0] is the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace squirrels
