#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cachendt {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitArgument = 2;    // bad arguments, ranges, insufficient data
inline constexpr int kExitInfeasible = 3;  // infeasible, unsupported or incompatible
inline constexpr int kExitTolerance = 4;   // a numerical check failed its tolerance

// Entry point behind the `cachendt` binary. `args` excludes the program
// name. Subcommands: bounds, simulate, verify-converse, replay.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cachendt
