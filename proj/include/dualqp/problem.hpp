#pragma once

// QP data model:
//
//   min 1/2 u'Qu + q'u   s.t.  u in [lb, ub],  clb <= Gbar u + gbar <= cub
//
// normalize() turns the two-sided rows into the one-sided system G u + g <= 0
// that the dual methods work with (dual cone = nonnegative orthant).

#include <cstddef>
#include <span>
#include <vector>

#include "dualqp/linalg.hpp"

namespace dualqp {

struct QpProblem {
  DenseMatrix Q;
  Vector q;
  Box box;
  DenseMatrix Gbar;  // m x n; may have zero rows
  Vector gbar;
  Vector clb;  // -inf allowed
  Vector cub;  // +inf allowed

  std::size_t num_vars() const { return q.size(); }
  std::size_t num_rows() const { return gbar.size(); }
};

/// Throws DimensionError / std::invalid_argument naming the broken invariant.
void validate(const QpProblem& p);

/// Which side of which source row a normalized row encodes.
struct RowOrigin {
  std::size_t source = 0;
  bool upper = true;  // true: Gbar_i u + gbar_i - cub_i <= 0
};

struct NormalizedQp {
  DenseMatrix Q;
  Vector q;
  Box box;
  DenseMatrix G;  // p x n
  Vector g;
  std::vector<RowOrigin> origin;

  std::size_t num_vars() const { return q.size(); }
  std::size_t num_constraints() const { return g.size(); }
};

NormalizedQp normalize(const QpProblem& p);

/// Recomputes g from new source offsets gbar (same Gbar, clb, cub).
void refresh_offsets(NormalizedQp& np, std::span<const double> gbar, std::span<const double> clb,
                     std::span<const double> cub);

struct ProblemConstants {
  double sigma_f = 0.0;  // lambda_min(Q)
  double L_f = 0.0;      // lambda_max(Q)
  double c_g = 0.0;      // ||G||_F
  double G_spectral = 0.0;
  double L_d = 0.0;      // ||G||_2^2 / sigma_f
  double Lbar_f = kInf;  // bound on max ||grad f|| over the box
  double R_p = kInf;     // box diameter
  double R_d_default = 1.0;
};

ProblemConstants constants(const NormalizedQp& np);

double objective(const NormalizedQp& np, std::span<const double> u);
Vector constraint_value(const NormalizedQp& np, std::span<const double> u);
/// ||[G u + g]_+||
double infeasibility(const NormalizedQp& np, std::span<const double> u);

/// Infeasibility of the original two-sided rows plus box violation.
double original_infeasibility(const QpProblem& p, std::span<const double> u);

double lagrangian(const NormalizedQp& np, std::span<const double> u, std::span<const double> x);
Vector lagrangian_grad(const NormalizedQp& np, std::span<const double> u,
                       std::span<const double> x);

/// G u_tilde + g, the inexact dual gradient at the multiplier u_tilde was computed for.
Vector dual_inexact_grad(const NormalizedQp& np, std::span<const double> u_tilde);

}  // namespace dualqp
