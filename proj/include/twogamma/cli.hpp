#pragma once
#include <iosfwd>

namespace twogamma {

//! Exit codes of the command-line driver
enum ExitCode : int {
  exit_ok = 0,
  exit_config = 2,
  exit_convergence = 3,
  exit_pole = 4
};

//! Full command-line driver (subcommands correlate, rate, spectrum-check).
//! Worker count from the TWOGAMMA_WORKERS environment variable.
int run_cli(int argc, const char *const *argv, std::ostream &out,
            std::ostream &err);

} // namespace twogamma
