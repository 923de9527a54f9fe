#pragma once

#include <iosfwd>

namespace episcale {

/// Exit status: 0 success, 1 invalid input, 2 numerical failure.
enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitNumerical = 2 };

/// Entry point of the episcale tool. Tables and summaries go to `out`
/// (or to files under --out), diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace episcale
