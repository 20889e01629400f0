#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pfol {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;

/// Subcommands: run, sweep, audit, fit, bound-check. Returns 0 on success,
/// 1 when a run or check fails and 2 for bad configuration or input.
int cli_main(int argc, char** argv);

/// Same as above with the program name omitted from `args` and explicit
/// output streams.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pfol
