#pragma once

// delta-accurate minimization of the Lagrangian L(., x) over the box with the
// constant-momentum optimal method for smooth strongly convex objectives.
//
// Stopping uses the gradient-mapping certificate: for u+ = P(v - grad/L_f),
//   L(u+, x) - d(x) <= ||L_f (v - u+)||^2 / (2 sigma_f),
// which is checkable without knowing d(x). The a-priori iteration count
// inner_iteration_bound() caps the run.

#include <cstdint>
#include <span>

#include "dualqp/linalg.hpp"
#include "dualqp/problem.hpp"

namespace dualqp {

struct InnerConfig {
  double delta = 1e-6;
  std::int64_t max_iterations = 100000;
  bool use_certified_stop = true;
};

struct InnerResult {
  Vector u_tilde;
  std::int64_t iterations_used = 0;
  double certificate_value = kInf;
  bool certified = false;  // certificate_value <= delta
};

/// floor(sqrt(L_f/sigma_f) * ln(L_f R_p^2 / (2 delta))), at least 1.
std::int64_t inner_iteration_bound(double delta, double R_p, double L_f, double sigma_f);

struct GradientMapCertificate {
  Vector u_plus;
  double bound = kInf;
};

GradientMapCertificate gradient_map_certificate(const NormalizedQp& np,
                                                const ProblemConstants& consts,
                                                std::span<const double> u,
                                                std::span<const double> x);

/// Scratch buffers reused across calls; one per thread.
struct InnerWorkspace {
  Vector linear;  // q + G'x
  Vector u, v, u_next, grad;
  void resize(std::size_t n);
};

InnerResult solve_inner(const NormalizedQp& np, const ProblemConstants& consts,
                        std::span<const double> x, std::span<const double> warm,
                        const InnerConfig& cfg);

InnerResult solve_inner(const NormalizedQp& np, const ProblemConstants& consts,
                        std::span<const double> x, std::span<const double> warm,
                        const InnerConfig& cfg, InnerWorkspace& ws);

}  // namespace dualqp
