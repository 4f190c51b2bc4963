#include "dualqp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dualqp {

namespace {

[[noreturn]] void dim_fail(const char* what, std::size_t got, std::size_t want) {
  std::ostringstream os;
  os << "QpProblem dimensions inconsistent: " << what << " is " << got << ", expected " << want;
  throw DimensionError(os.str());
}

}  // namespace

void validate(const QpProblem& p) {
  const std::size_t n = p.q.size();
  if (n == 0) throw DimensionError("QpProblem needs at least one variable");
  if (p.Q.rows() != n) dim_fail("rows(Q)", p.Q.rows(), n);
  if (p.Q.cols() != n) dim_fail("cols(Q)", p.Q.cols(), n);
  if (p.box.lb.size() != n) dim_fail("len(lb)", p.box.lb.size(), n);
  if (p.box.ub.size() != n) dim_fail("len(ub)", p.box.ub.size(), n);
  const std::size_t m = p.gbar.size();
  if (p.Gbar.rows() != m) dim_fail("rows(Gbar)", p.Gbar.rows(), m);
  if (m > 0 && p.Gbar.cols() != n) dim_fail("cols(Gbar)", p.Gbar.cols(), n);
  if (p.clb.size() != m) dim_fail("len(clb)", p.clb.size(), m);
  if (p.cub.size() != m) dim_fail("len(cub)", p.cub.size(), m);
  if (!p.Q.all_finite()) throw std::invalid_argument("Q has non-finite entries");
  if (!all_finite(p.q)) throw std::invalid_argument("q has non-finite entries");
  if (!p.Gbar.all_finite()) throw std::invalid_argument("Gbar has non-finite entries");
  if (!all_finite(p.gbar)) throw std::invalid_argument("gbar has non-finite entries");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isnan(p.box.lb[i]) || std::isnan(p.box.ub[i]) || p.box.lb[i] > p.box.ub[i]) {
      std::ostringstream os;
      os << "box invariant lb <= ub violated at index " << i;
      throw std::invalid_argument(os.str());
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    if (std::isnan(p.clb[i]) || std::isnan(p.cub[i]) || p.clb[i] > p.cub[i]) {
      std::ostringstream os;
      os << "constraint invariant clb <= cub violated at row " << i;
      throw std::invalid_argument(os.str());
    }
    if (!std::isfinite(p.clb[i]) && !std::isfinite(p.cub[i])) {
      std::ostringstream os;
      os << "constraint row " << i << " has both bounds infinite (vacuous constraint)";
      throw std::invalid_argument(os.str());
    }
  }
}

NormalizedQp normalize(const QpProblem& p) {
  validate(p);
  const std::size_t n = p.num_vars();
  NormalizedQp np;
  np.Q = DenseMatrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) np.Q(i, j) = 0.5 * (p.Q(i, j) + p.Q(j, i));
  np.q = p.q;
  np.box = p.box;

  std::vector<double> rows;
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    const auto src = p.Gbar.row(i);
    if (std::isfinite(p.cub[i])) {
      rows.insert(rows.end(), src.begin(), src.end());
      np.g.push_back(p.gbar[i] - p.cub[i]);
      np.origin.push_back({i, true});
    }
    if (std::isfinite(p.clb[i])) {
      for (double v : src) rows.push_back(-v);
      np.g.push_back(p.clb[i] - p.gbar[i]);
      np.origin.push_back({i, false});
    }
  }
  np.G = DenseMatrix(np.g.size(), n, std::move(rows));
  return np;
}

void refresh_offsets(NormalizedQp& np, std::span<const double> gbar, std::span<const double> clb,
                     std::span<const double> cub) {
  for (std::size_t r = 0; r < np.origin.size(); ++r) {
    const RowOrigin o = np.origin[r];
    np.g[r] = o.upper ? gbar[o.source] - cub[o.source] : clb[o.source] - gbar[o.source];
  }
}

ProblemConstants constants(const NormalizedQp& np) {
  ProblemConstants c;
  const EigExtremes e = eig_extremes_spd(np.Q);
  c.sigma_f = e.lambda_min;
  c.L_f = e.lambda_max;
  c.c_g = frobenius_norm(np.G);
  c.G_spectral = spectral_norm(np.G);
  // A zero constraint matrix gives a constant dual gradient; any positive
  // constant is then a valid Lipschitz bound.
  c.L_d = c.G_spectral > 0.0 ? c.G_spectral * c.G_spectral / c.sigma_f : 1.0;

  if (np.box.bounded()) {
    double sq = 0.0;
    for (std::size_t i = 0; i < np.box.size(); ++i) {
      const double m = std::max(std::abs(np.box.lb[i]), std::abs(np.box.ub[i]));
      sq += m * m;
    }
    c.Lbar_f = c.L_f * std::sqrt(sq) + norm2(np.q);
    c.R_p = dist2(np.box.ub, np.box.lb);
  }
  c.R_d_default = c.c_g > 0.0 ? std::max({1.0, 1.0 / c.c_g, c.L_f / c.c_g}) : 1.0;
  return c;
}

double objective(const NormalizedQp& np, std::span<const double> u) {
  const Vector qu = mat_vec(np.Q, u);
  return 0.5 * dot(u, qu) + dot(np.q, u);
}

Vector constraint_value(const NormalizedQp& np, std::span<const double> u) {
  Vector gu(np.num_constraints());
  if (!gu.empty()) mat_vec_into(np.G, u, gu);
  for (std::size_t i = 0; i < gu.size(); ++i) gu[i] += np.g[i];
  return gu;
}

double infeasibility(const NormalizedQp& np, std::span<const double> u) {
  const Vector gu = constraint_value(np, u);
  double s = 0.0;
  for (double v : gu)
    if (v > 0.0) s += v * v;
  return std::sqrt(s);
}

double original_infeasibility(const QpProblem& p, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.num_rows(); ++i) {
    const double v = dot(p.Gbar.row(i), u) + p.gbar[i];
    if (v > p.cub[i]) s += (v - p.cub[i]) * (v - p.cub[i]);
    if (v < p.clb[i]) s += (p.clb[i] - v) * (p.clb[i] - v);
  }
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i] > p.box.ub[i]) s += (u[i] - p.box.ub[i]) * (u[i] - p.box.ub[i]);
    if (u[i] < p.box.lb[i]) s += (p.box.lb[i] - u[i]) * (p.box.lb[i] - u[i]);
  }
  return std::sqrt(s);
}

namespace {

void check_multiplier(const NormalizedQp& np, std::span<const double> x) {
  if (x.size() != np.num_constraints()) {
    std::ostringstream os;
    os << "multiplier length " << x.size() << " != number of constraint rows "
       << np.num_constraints();
    throw DimensionError(os.str());
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0)) {
      std::ostringstream os;
      os << "dual feasibility broken: multiplier x[" << i << "] = " << x[i] << " < 0";
      throw std::invalid_argument(os.str());
    }
  }
}

}  // namespace

double lagrangian(const NormalizedQp& np, std::span<const double> u, std::span<const double> x) {
  check_multiplier(np, x);
  return objective(np, u) + dot(x, constraint_value(np, u));
}

Vector lagrangian_grad(const NormalizedQp& np, std::span<const double> u,
                       std::span<const double> x) {
  check_multiplier(np, x);
  Vector grad = mat_vec(np.Q, u);
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += np.q[i];
  if (np.num_constraints() > 0) {
    Vector gtx(np.num_vars());
    mat_t_vec_into(np.G, x, gtx);
    axpy(1.0, gtx, grad);
  }
  return grad;
}

Vector dual_inexact_grad(const NormalizedQp& np, std::span<const double> u_tilde) {
  return constraint_value(np, u_tilde);
}

}  // namespace dualqp
