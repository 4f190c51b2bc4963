#pragma once

// Inexact dual first-order outer loop. Per iteration k:
//
//   u^k     = delta-accurate minimizer of L(., y^k) over the box
//   x^k     = [y^k + grad/(2 L_d)]_+          grad = G u^k + g
//   y^{k+1} = (1 - theta_k) x^k + theta_k [y^0 + (1/(2 L_d)) sum_j (j+1)/2 grad_j]_+
//
// theta_k = 0 gives the dual gradient variant (IDGM), theta_k = 2/(k+3) the
// dual fast gradient variant (IDFGM). Primal points are recovered either as
// the last inner solution or a (weighted) running average of inner solutions.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dualqp/inner.hpp"
#include "dualqp/linalg.hpp"
#include "dualqp/problem.hpp"

namespace dualqp {

enum class Variant { IDGM, IDFGM };
enum class Recovery { LastIterate, Average };
enum class SolveStatus { Converged, MaxIterations, CertificateHorizonReached };

/// 1 for IDGM, 2 for IDFGM.
int p_theta(Variant v);
std::string to_string(Variant v);
std::string to_string(Recovery r);
std::string to_string(SolveStatus s);
Variant parse_variant(const std::string& s);
Recovery parse_recovery(const std::string& s);

double theta(std::int64_t k, Variant v);

struct OuterState {
  std::int64_t k = 0;
  Vector x;          // x^k
  Vector y;          // y^k (y^{k+1} after a completed step)
  Vector y0;
  Vector z_sum;      // sum_j (j+1)/2 grad(y^j), IDFGM
  Vector x_hat_sum;  // sum_j x^j, IDGM
  Vector u_hat;
  Vector u_last;
  double weight_sum = 0.0;

  static OuterState initial(std::size_t n, std::size_t p, std::span<const double> y0 = {});
};

/// [y + grad/(2 L_d)]_+
Vector dual_gradient_step(std::span<const double> y, std::span<const double> grad, double L_d);

/// y^{k+1} from x^k and the accumulated weighted gradients in state.z_sum
/// (which must already include the term for iteration k).
Vector fast_extrapolation_step(const OuterState& state, std::span<const double> x_k, double L_d,
                               std::int64_t k);

/// Folds u_k into the running average; returns the updated average.
const Vector& primal_average_update(OuterState& state, std::span<const double> u_k,
                                    std::int64_t k, Variant v, const Box& box);

struct FinalizedPoint {
  Vector x_hat;
  Vector x_final;
  Vector u_final;
  double dtilde = 0.0;  // L(u_final, x_final)
  std::int64_t inner_iterations = 0;
};

/// IDGM final-point redefinition x = [x_hat + grad(x_hat)/(2 L_d)]_+ with
/// x_hat the average of x^0..x^k, followed by an inner solve at x.
FinalizedPoint idgm_finalize(const NormalizedQp& np, const ProblemConstants& consts,
                             const OuterState& state, const InnerConfig& inner,
                             std::span<const double> warm, InnerWorkspace& ws);

struct SolveConfig {
  Variant variant = Variant::IDFGM;
  Recovery recovery = Recovery::LastIterate;
  double eps = 1e-2;
  double delta = 1e-4;
  std::int64_t max_outer = 100000;
  std::optional<double> f_ref;
  // Without f_ref: stop on |f(u) - LB| <= eps with LB the best certified dual
  // lower bound seen so far.
  bool dual_gap_stop = true;
  std::optional<std::int64_t> outer_horizon;
  Vector y0;      // empty: zero
  Vector u_warm;  // empty: projection of 0
  std::int64_t inner_max_iterations = 100000;
  bool inner_certified_stop = true;
  bool finalize_idgm = true;
  // Also evaluate dtilde at the dual point the rate theory speaks about (x^k,
  // or the redefined IDGM point); costs extra inner solves.
  bool record_dual_iterate = false;
};

struct TraceRecord {
  std::int64_t k = 0;
  double f = 0.0;
  double infeas = 0.0;
  double dtilde = 0.0;  // L(u^k, y^k)
  std::int64_t inner_iters = 0;
  double dtilde_x = 0.0;  // only with record_dual_iterate
};

struct SolveResult {
  Vector u_out;
  Vector x_out;
  SolveStatus status = SolveStatus::MaxIterations;
  std::int64_t outer_iterations = 0;
  std::int64_t total_inner_iterations = 0;
  std::int64_t diagnostic_inner_iterations = 0;
  std::int64_t uncertified_inner_solves = 0;
  double f = 0.0;
  double infeas = 0.0;
  double dual_lower_bound = -kInf;
  std::vector<TraceRecord> trace;
};

SolveResult solve(const NormalizedQp& np, const ProblemConstants& consts, const SolveConfig& cfg);

/// Trace CSV with header "k,f,infeas,dtilde,inner_iters".
std::string trace_csv(const std::vector<TraceRecord>& trace);

}  // namespace dualqp
