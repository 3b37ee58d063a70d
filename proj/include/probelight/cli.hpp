#pragma once

#include <iosfwd>

namespace probelight::cli {

enum ExitCode : int {
    kSuccess = 0,
    kRuntimeError = 1,
    kUsageError = 2,
};

/// Parses argv and runs the chosen subcommand. Normal output goes to `out`,
/// diagnostics and usage text to `err`.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace probelight::cli
