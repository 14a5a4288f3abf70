#pragma once

#include <iosfwd>

namespace hbary {

// Exit codes of the command-line front end.
enum ExitCode : int {
  exit_ok = 0,
  exit_input = 1,
  exit_nonconvergence = 2,
  exit_verify_failed = 3,
};

// Entry point of `bary`. Results go to `out` (or to files under --out), diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace hbary
