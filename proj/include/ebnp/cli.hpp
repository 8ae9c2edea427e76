#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ebnp {

// Exit statuses of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Subcommands: denoise, simulate, diagnose, exact. `args` excludes the
// program name.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, char** argv);

}  // namespace ebnp
