#pragma once

#include <exception>
#include <ostream>

namespace contourlab {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitIo = 3, kExitProtocol = 4, kExitConstraint = 5 };

int exit_code_for(const std::exception& e);

/// Entry point of the `contourlab` command. Never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace contourlab
