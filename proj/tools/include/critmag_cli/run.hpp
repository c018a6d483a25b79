#pragma once

#include <iosfwd>

namespace critmag::cli {

// Entry point of the critmag executable. Progress and tables go to out,
// timing and errors to stderr. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out);

}  // namespace critmag::cli
