#include "dualqp/outer.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace dualqp {

int p_theta(Variant v) { return v == Variant::IDGM ? 1 : 2; }

std::string to_string(Variant v) { return v == Variant::IDGM ? "idgm" : "idfgm"; }

std::string to_string(Recovery r) { return r == Recovery::LastIterate ? "last" : "average"; }

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged:
      return "Converged";
    case SolveStatus::MaxIterations:
      return "MaxIterations";
    case SolveStatus::CertificateHorizonReached:
      return "CertificateHorizonReached";
  }
  return "Unknown";
}

Variant parse_variant(const std::string& s) {
  if (s == "idgm" || s == "IDGM") return Variant::IDGM;
  if (s == "idfgm" || s == "IDFGM") return Variant::IDFGM;
  throw std::invalid_argument("unknown algorithm '" + s + "' (expected idgm or idfgm)");
}

Recovery parse_recovery(const std::string& s) {
  if (s == "last" || s == "LastIterate") return Recovery::LastIterate;
  if (s == "average" || s == "Average") return Recovery::Average;
  throw std::invalid_argument("unknown recovery '" + s + "' (expected last or average)");
}

double theta(std::int64_t k, Variant v) {
  if (k < 0) throw std::invalid_argument("theta: k must be >= 0");
  if (v == Variant::IDGM) return 0.0;
  return 2.0 / (static_cast<double>(k) + 3.0);
}

OuterState OuterState::initial(std::size_t n, std::size_t p, std::span<const double> y0) {
  OuterState s;
  if (!y0.empty() && y0.size() != p) throw DimensionError("initial dual point length != p");
  s.y0 = y0.empty() ? Vector(p, 0.0) : Vector(y0.begin(), y0.end());
  for (double v : s.y0)
    if (!(v >= 0.0)) throw std::invalid_argument("initial dual point must be >= 0");
  s.y = s.y0;
  s.x = s.y0;
  s.z_sum.assign(p, 0.0);
  s.x_hat_sum.assign(p, 0.0);
  s.u_hat.assign(n, 0.0);
  s.u_last.assign(n, 0.0);
  return s;
}

Vector dual_gradient_step(std::span<const double> y, std::span<const double> grad, double L_d) {
  if (y.size() != grad.size()) throw DimensionError("dual_gradient_step: length mismatch");
  Vector x(y.size());
  const double step = 1.0 / (2.0 * L_d);
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] + step * grad[i];
  return nonneg_project(x);
}

Vector fast_extrapolation_step(const OuterState& state, std::span<const double> x_k, double L_d,
                               std::int64_t k) {
  const double th = 2.0 / (static_cast<double>(k) + 3.0);
  const double step = 1.0 / (2.0 * L_d);
  Vector y(x_k.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double anchor = std::max(0.0, state.y0[i] + step * state.z_sum[i]);
    y[i] = (1.0 - th) * x_k[i] + th * anchor;
  }
  return y;
}

const Vector& primal_average_update(OuterState& state, std::span<const double> u_k,
                                    std::int64_t k, Variant v, const Box& box) {
  const double w = v == Variant::IDGM ? 1.0 : static_cast<double>(k) + 1.0;
  state.weight_sum += w;
  const double a = w / state.weight_sum;
  state.u_hat.resize(u_k.size());
  for (std::size_t i = 0; i < u_k.size(); ++i) {
    state.u_hat[i] += a * (u_k[i] - state.u_hat[i]);
  }
  // Rounding can push a convex combination a few ulps outside the box.
  box_project_inplace(state.u_hat, box);
  return state.u_hat;
}

FinalizedPoint idgm_finalize(const NormalizedQp& np, const ProblemConstants& consts,
                             const OuterState& state, const InnerConfig& inner,
                             std::span<const double> warm, InnerWorkspace& ws) {
  FinalizedPoint out;
  const double count = static_cast<double>(state.k) + 1.0;
  out.x_hat.resize(state.x_hat_sum.size());
  for (std::size_t i = 0; i < out.x_hat.size(); ++i) out.x_hat[i] = state.x_hat_sum[i] / count;
  out.x_hat = nonneg_project(out.x_hat);

  const InnerResult at_hat = solve_inner(np, consts, out.x_hat, warm, inner, ws);
  out.inner_iterations += at_hat.iterations_used;
  const Vector grad = dual_inexact_grad(np, at_hat.u_tilde);
  out.x_final = dual_gradient_step(out.x_hat, grad, consts.L_d);

  const InnerResult at_final = solve_inner(np, consts, out.x_final, at_hat.u_tilde, inner, ws);
  out.inner_iterations += at_final.iterations_used;
  out.u_final = at_final.u_tilde;
  out.dtilde = lagrangian(np, out.u_final, out.x_final);
  return out;
}

namespace {

void require_nonneg(std::span<const double> v, const char* name, std::int64_t k) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0)) {
      std::ostringstream os;
      os << "outer iteration " << k << ": dual iterate " << name << "[" << i << "] = " << v[i]
         << " left the nonnegative orthant";
      throw std::logic_error(os.str());
    }
  }
}

InnerResult inner_at(const NormalizedQp& np, const ProblemConstants& consts,
                     std::span<const double> x, std::span<const double> warm,
                     const InnerConfig& cfg, InnerWorkspace& ws, std::int64_t k) {
  try {
    return solve_inner(np, consts, x, warm, cfg, ws);
  } catch (const std::exception& e) {
    std::ostringstream os;
    os << "inner solve failed at outer iteration " << k << ": " << e.what();
    throw std::runtime_error(os.str());
  }
}

bool meets_target(double f, double infeas, double target, double eps) {
  return std::abs(f - target) <= eps && infeas <= eps;
}

}  // namespace

SolveResult solve(const NormalizedQp& np, const ProblemConstants& consts, const SolveConfig& cfg) {
  if (!(cfg.eps > 0.0)) throw std::invalid_argument("solve: eps must be > 0");
  if (!(cfg.delta > 0.0)) throw std::invalid_argument("solve: delta must be > 0");
  if (cfg.max_outer < 1) throw std::invalid_argument("solve: max_outer must be >= 1");
  if (cfg.outer_horizon && *cfg.outer_horizon < 1) {
    throw std::invalid_argument("solve: certificate horizon must be >= 1");
  }
  const std::size_t n = np.num_vars();
  const std::size_t p = np.num_constraints();

  OuterState st = OuterState::initial(n, p, cfg.y0);
  if (!cfg.u_warm.empty()) {
    if (cfg.u_warm.size() != n) throw DimensionError("solve: primal warm start length != n");
    st.u_last = cfg.u_warm;
  }
  box_project_inplace(st.u_last, np.box);

  InnerConfig icfg;
  icfg.delta = cfg.delta;
  icfg.max_iterations = cfg.inner_max_iterations;
  icfg.use_certified_stop = cfg.inner_certified_stop;
  InnerWorkspace ws;
  ws.resize(n);

  const bool idgm = cfg.variant == Variant::IDGM;
  const bool last = cfg.recovery == Recovery::LastIterate;

  SolveResult res;
  Vector u_out;
  Vector v_k;  // u(x^k) for IDFGM last-iterate
  for (std::int64_t k = 0;; ++k) {
    st.k = k;
    require_nonneg(st.y, "y", k);

    const InnerResult ir = inner_at(np, consts, st.y, st.u_last, icfg, ws, k);
    res.total_inner_iterations += ir.iterations_used;
    if (!ir.certified) ++res.uncertified_inner_solves;
    st.u_last = ir.u_tilde;

    const Vector grad = dual_inexact_grad(np, st.u_last);
    const double f_u = objective(np, st.u_last);
    const double dtilde = f_u + dot(st.y, grad);
    res.dual_lower_bound = std::max(res.dual_lower_bound, dtilde - ir.certificate_value);

    st.x = dual_gradient_step(st.y, grad, consts.L_d);
    require_nonneg(st.x, "x", k);

    TraceRecord rec;
    rec.k = k;
    rec.dtilde = dtilde;
    rec.inner_iters = ir.iterations_used;

    if (idgm) {
      axpy(1.0, st.x, st.x_hat_sum);
    } else {
      const double w = 0.5 * (static_cast<double>(k) + 1.0);
      axpy(w, grad, st.z_sum);
    }
    primal_average_update(st, st.u_last, k, cfg.variant, np.box);

    if (!last) {
      u_out = st.u_hat;
    } else if (idgm) {
      u_out = st.u_last;
    } else {
      const InnerResult vr = inner_at(np, consts, st.x, st.u_last, icfg, ws, k);
      res.total_inner_iterations += vr.iterations_used;
      rec.inner_iters += vr.iterations_used;
      if (!vr.certified) ++res.uncertified_inner_solves;
      v_k = vr.u_tilde;
      u_out = v_k;
    }

    if (cfg.record_dual_iterate) {
      if (idgm) {
        const FinalizedPoint fp = idgm_finalize(np, consts, st, icfg, st.u_last, ws);
        res.diagnostic_inner_iterations += fp.inner_iterations;
        rec.dtilde_x = fp.dtilde;
      } else if (last) {
        rec.dtilde_x = lagrangian(np, v_k, st.x);
      } else {
        const InnerResult vr = inner_at(np, consts, st.x, st.u_last, icfg, ws, k);
        res.diagnostic_inner_iterations += vr.iterations_used;
        rec.dtilde_x = lagrangian(np, vr.u_tilde, st.x);
      }
    }

    rec.f = last && idgm ? f_u : objective(np, u_out);
    rec.infeas = infeasibility(np, u_out);
    res.trace.push_back(rec);

    bool stop = false;
    if (cfg.f_ref) {
      if (meets_target(rec.f, rec.infeas, *cfg.f_ref, cfg.eps)) {
        res.status = SolveStatus::Converged;
        stop = true;
      }
    } else if (cfg.dual_gap_stop && meets_target(rec.f, rec.infeas, res.dual_lower_bound, cfg.eps)) {
      res.status = SolveStatus::Converged;
      stop = true;
    }
    if (!stop && cfg.outer_horizon && k + 1 >= *cfg.outer_horizon) {
      res.status = SolveStatus::CertificateHorizonReached;
      stop = true;
    }
    if (!stop && k + 1 >= cfg.max_outer) {
      res.status = SolveStatus::MaxIterations;
      stop = true;
    }
    if (stop) {
      res.outer_iterations = k + 1;
      res.u_out = u_out;
      res.x_out = st.x;
      res.f = rec.f;
      res.infeas = rec.infeas;
      break;
    }

    st.y = idgm ? st.x : fast_extrapolation_step(st, st.x, consts.L_d, k);
  }

  if (idgm && last && cfg.finalize_idgm) {
    const FinalizedPoint fp = idgm_finalize(np, consts, st, icfg, st.u_last, ws);
    res.total_inner_iterations += fp.inner_iterations;
    const double f_fin = objective(np, fp.u_final);
    const double inf_fin = infeasibility(np, fp.u_final);
    // A point that already passed the stopping test is not traded for one
    // that does not.
    bool keep = true;
    if (res.status == SolveStatus::Converged) {
      const double target = cfg.f_ref ? *cfg.f_ref : res.dual_lower_bound;
      keep = meets_target(f_fin, inf_fin, target, cfg.eps);
    }
    if (keep) {
      res.u_out = fp.u_final;
      res.x_out = fp.x_final;
      res.f = f_fin;
      res.infeas = inf_fin;
    }
  }
  return res;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

}  // namespace

std::string trace_csv(const std::vector<TraceRecord>& trace) {
  std::string out = "k,f,infeas,dtilde,inner_iters\n";
  for (const auto& r : trace) {
    out += std::to_string(r.k);
    out += ',';
    append_number(out, r.f);
    out += ',';
    append_number(out, r.infeas);
    out += ',';
    append_number(out, r.dtilde);
    out += ',';
    out += std::to_string(r.inner_iters);
    out += '\n';
  }
  return out;
}

}  // namespace dualqp
