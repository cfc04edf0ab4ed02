#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace metaaudit {

/// Exit statuses used by the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;

/// Runs one subcommand. `args` excludes the program name. Human-readable
/// tables go to `out`, single-line diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace metaaudit
