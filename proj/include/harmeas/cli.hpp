#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace harmeas {

/// Exit codes of the experiment driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitFlagged = 3;

/// args[0] is the program name. Errors are written to `err` as one JSON
/// object; a short JSON status line goes to `out`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace harmeas
