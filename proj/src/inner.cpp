#include "dualqp/inner.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dualqp {

std::int64_t inner_iteration_bound(double delta, double R_p, double L_f, double sigma_f) {
  if (std::isinf(R_p)) {
    throw std::domain_error("inner iteration bound: certificate requires compact U or explicit R_p");
  }
  if (!(delta > 0.0) || !(R_p > 0.0) || !(L_f > 0.0) || !(sigma_f > 0.0) ||
      !std::isfinite(delta) || !std::isfinite(L_f) || !std::isfinite(sigma_f)) {
    std::ostringstream os;
    os << "inner iteration bound needs positive finite arguments (delta=" << delta
       << ", R_p=" << R_p << ", L_f=" << L_f << ", sigma_f=" << sigma_f << ")";
    throw std::invalid_argument(os.str());
  }
  const double value = std::sqrt(L_f / sigma_f) * std::log(L_f * R_p * R_p / (2.0 * delta));
  if (!(value >= 1.0)) return 1;
  if (value >= 9.0e18) return INT64_MAX;
  return static_cast<std::int64_t>(std::floor(value));
}

GradientMapCertificate gradient_map_certificate(const NormalizedQp& np,
                                                const ProblemConstants& consts,
                                                std::span<const double> u,
                                                std::span<const double> x) {
  const Vector grad = lagrangian_grad(np, u, x);
  GradientMapCertificate out;
  out.u_plus.resize(u.size());
  double sq = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    out.u_plus[i] = std::clamp(u[i] - grad[i] / consts.L_f, np.box.lb[i], np.box.ub[i]);
    const double d = consts.L_f * (u[i] - out.u_plus[i]);
    sq += d * d;
  }
  out.bound = sq / (2.0 * consts.sigma_f);
  return out;
}

void InnerWorkspace::resize(std::size_t n) {
  linear.resize(n);
  u.resize(n);
  v.resize(n);
  u_next.resize(n);
  grad.resize(n);
}

InnerResult solve_inner(const NormalizedQp& np, const ProblemConstants& consts,
                        std::span<const double> x, std::span<const double> warm,
                        const InnerConfig& cfg) {
  InnerWorkspace ws;
  return solve_inner(np, consts, x, warm, cfg, ws);
}

InnerResult solve_inner(const NormalizedQp& np, const ProblemConstants& consts,
                        std::span<const double> x, std::span<const double> warm,
                        const InnerConfig& cfg, InnerWorkspace& ws) {
  const std::size_t n = np.num_vars();
  if (!(cfg.delta > 0.0)) throw std::invalid_argument("InnerConfig: delta must be > 0");
  if (cfg.max_iterations < 1) throw std::invalid_argument("InnerConfig: max_iterations must be >= 1");
  if (warm.size() != n) throw DimensionError("solve_inner: warm start length != n");
  if (x.size() != np.num_constraints()) throw DimensionError("solve_inner: multiplier length != p");
  for (double xi : x)
    if (!(xi >= 0.0)) throw std::invalid_argument("solve_inner: multiplier must be >= 0");

  std::int64_t cap = cfg.max_iterations;
  const bool compact = std::isfinite(consts.R_p) && consts.R_p > 0.0;
  if (!cfg.use_certified_stop) {
    cap = inner_iteration_bound(cfg.delta, consts.R_p, consts.L_f, consts.sigma_f);
  } else if (compact) {
    cap = std::min(cap, inner_iteration_bound(cfg.delta, consts.R_p, consts.L_f, consts.sigma_f));
  }

  ws.resize(n);
  if (np.num_constraints() > 0) {
    mat_t_vec_into(np.G, x, ws.linear);
    for (std::size_t i = 0; i < n; ++i) ws.linear[i] += np.q[i];
  } else {
    std::copy(np.q.begin(), np.q.end(), ws.linear.begin());
  }
  std::copy(warm.begin(), warm.end(), ws.u.begin());
  box_project_inplace(ws.u, np.box);
  ws.v = ws.u;

  const double L = consts.L_f;
  const double sq_L = std::sqrt(L);
  const double sq_s = std::sqrt(consts.sigma_f);
  const double momentum = (sq_L - sq_s) / (sq_L + sq_s);
  const double scale = L * L / (2.0 * consts.sigma_f);

  InnerResult result;
  for (std::int64_t t = 0;; ++t) {
    mat_vec_into(np.Q, ws.v, ws.grad);
    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double g = ws.grad[i] + ws.linear[i];
      const double next = std::clamp(ws.v[i] - g / L, np.box.lb[i], np.box.ub[i]);
      ws.u_next[i] = next;
      sq += (ws.v[i] - next) * (ws.v[i] - next);
    }
    const double bound = scale * sq;
    const bool fired = cfg.use_certified_stop && bound <= cfg.delta;
    if (fired || t + 1 >= cap) {
      if (cfg.use_certified_stop && !fired && !compact) {
        std::ostringstream os;
        os << "inner solver exhausted " << cfg.max_iterations
           << " iterations without certificate (certificate " << bound << " > delta "
           << cfg.delta << ") on a non-compact box";
        throw std::runtime_error(os.str());
      }
      result.u_tilde = ws.u_next;
      result.iterations_used = fired ? t : t + 1;
      result.certificate_value = bound;
      result.certified = bound <= cfg.delta;
      return result;
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double next = ws.u_next[i];
      ws.v[i] = next + momentum * (next - ws.u[i]);
      ws.u[i] = next;
    }
  }
}

}  // namespace dualqp
