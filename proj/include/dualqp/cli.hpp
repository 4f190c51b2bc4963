#pragma once

#include <iosfwd>

namespace dualqp {

/// Subcommands: solve, certify, bench-sensitivity, bench-scaling, mpc.
/// Returns 0 on convergence, 2 when an iteration cap or the certificate
/// horizon ended a solve, 1 on invalid input.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dualqp
