#pragma once

#include <iosfwd>

#include "optwedge/error.hpp"

namespace optwedge::app {

// Process exit codes; documented in the README.
enum ExitCode : int {
  kExitOk = 0,
  kExitInternal = 1,
  kExitUsage = 2,
  kExitIo = 3,
  kExitParse = 4,
  kExitValidation = 5,
  kExitInfeasible = 6,
  kExitNumerical = 7,
  kExitFit = 8,
  kExitVersion = 9,
};

int exit_code_for(ErrorKind kind) noexcept;

/// Entry point of the `optwedge` tool. Progress goes to `out`, JSON error
/// records to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace optwedge::app
