#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace glr {

/// Exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Runs one command. `args` excludes the program name. Normal output goes to
/// `out`; usage text, errors and progress go to `err`.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, const char* const* argv);

} // namespace glr
