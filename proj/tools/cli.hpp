#pragma once

#include <iosfwd>

namespace pcnbal::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kInputError = 3, kInvariantViolation = 4 };

/// Entry point shared by the pcnbal binary and the tests. Subcommands:
/// gen, simulate, evaluate.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pcnbal::cli
