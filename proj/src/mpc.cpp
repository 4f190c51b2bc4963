#include "dualqp/mpc.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "dualqp/certify.hpp"

namespace dualqp {

LtiModel balancing_robot_model() {
  LtiModel m;
  m.A = DenseMatrix::from_rows({{1.0, 0.0054, -2e-4, 1e-4},
                                {0.0, 0.4717, -0.0465, 0.0211},
                                {0.0, 0.03, 1.0049, 0.0068},
                                {0.0, 6.0742, 1.0721, 0.7633}});
  m.B = DenseMatrix::from_rows({{0.0002}, {0.0448}, {-0.0025}, {-0.5147}});
  return m;
}

MpcSpec balancing_robot_spec(double beta, AngleUnit unit) {
  MpcSpec s;
  s.N = 10;
  s.Q_stage = DenseMatrix::diagonal(Vector{1.0, 1.0, 600.0, 1.0});
  s.R_stage = DenseMatrix::diagonal(Vector{2.0});
  s.beta = beta;
  s.u_min = {-12.0};
  s.u_max = {12.0};
  const double theta_max = unit == AngleUnit::Radians ? 15.0 * std::numbers::pi / 180.0 : 15.0;
  s.state_lb = {-0.5, -kInf, -theta_max, -kInf};
  s.state_ub = {0.5, kInf, theta_max, kInf};
  return s;
}

namespace {

void check_spec(const LtiModel& model, const MpcSpec& spec) {
  const std::size_t nx = model.nx(), nu = model.nu();
  if (model.A.cols() != nx || model.B.rows() != nx || nu == 0) {
    throw DimensionError("LtiModel: A must be nx x nx and B nx x nu");
  }
  if (spec.N < 1) throw std::invalid_argument("MpcSpec: horizon N must be >= 1");
  if (spec.Q_stage.rows() != nx || spec.Q_stage.cols() != nx) {
    throw DimensionError("MpcSpec: Q_stage must be nx x nx");
  }
  if (spec.R_stage.rows() != nu || spec.R_stage.cols() != nu) {
    throw DimensionError("MpcSpec: R_stage must be nu x nu");
  }
  if (!(spec.beta >= 0.0)) throw std::invalid_argument("MpcSpec: beta must be >= 0");
  if (spec.u_min.size() != nu || spec.u_max.size() != nu) {
    throw DimensionError("MpcSpec: input bounds must have nu entries");
  }
  if (spec.state_lb.size() != nx || spec.state_ub.size() != nx) {
    throw DimensionError("MpcSpec: state bounds must have nx entries");
  }
}

}  // namespace

CondensedQp condense(const LtiModel& model, const MpcSpec& spec) {
  check_spec(model, spec);
  const std::size_t nx = model.nx(), nu = model.nu(), N = spec.N;
  CondensedQp c;
  c.nx = nx;
  c.nu = nu;
  c.N = N;
  c.beta = spec.beta;

  // Phi block k = A^{k+1}; Gamma block (k, i) = A^{k-i} B for i <= k.
  c.Phi = DenseMatrix(N * nx, nx);
  c.Gamma = DenseMatrix(N * nx, N * nu);
  std::vector<DenseMatrix> AkB;  // A^j B, j = 0..N-1
  DenseMatrix Ak = model.A;
  DenseMatrix cur = model.B;
  for (std::size_t j = 0; j < N; ++j) {
    AkB.push_back(cur);
    cur = mat_mul(model.A, cur);
  }
  for (std::size_t k = 0; k < N; ++k) {
    for (std::size_t r = 0; r < nx; ++r)
      for (std::size_t s = 0; s < nx; ++s) c.Phi(k * nx + r, s) = Ak(r, s);
    Ak = mat_mul(model.A, Ak);
    for (std::size_t i = 0; i <= k; ++i) {
      const DenseMatrix& blk = AkB[k - i];
      for (std::size_t r = 0; r < nx; ++r)
        for (std::size_t s = 0; s < nu; ++s) c.Gamma(k * nx + r, i * nu + s) = blk(r, s);
    }
  }

  DenseMatrix QG(N * nx, N * nu);  // Qbar Gamma
  DenseMatrix QP(N * nx, nx);      // Qbar Phi
  for (std::size_t k = 0; k < N; ++k) {
    for (std::size_t r = 0; r < nx; ++r) {
      for (std::size_t s = 0; s < nx; ++s) {
        const double w = spec.Q_stage(r, s);
        if (w == 0.0) continue;
        for (std::size_t j = 0; j < N * nu; ++j) QG(k * nx + r, j) += w * c.Gamma(k * nx + s, j);
        for (std::size_t j = 0; j < nx; ++j) QP(k * nx + r, j) += w * c.Phi(k * nx + s, j);
      }
    }
  }
  const DenseMatrix Gt = c.Gamma.transposed();
  c.H = mat_mul(Gt, QG);
  c.F = mat_mul(Gt, QP);
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t r = 0; r < nu; ++r)
      for (std::size_t s = 0; s < nu; ++s) c.H(k * nu + r, k * nu + s) += spec.R_stage(r, s);
  if (spec.beta > 0.0) {
    // D'D for rows u_0 - u_prev, u_k - u_{k-1}: 2 on the diagonal except the
    // last block, -1 on the first off-diagonal blocks.
    for (std::size_t k = 0; k < N; ++k) {
      for (std::size_t r = 0; r < nu; ++r) {
        c.H(k * nu + r, k * nu + r) += spec.beta * (k + 1 < N ? 2.0 : 1.0);
        if (k + 1 < N) {
          c.H(k * nu + r, (k + 1) * nu + r) -= spec.beta;
          c.H((k + 1) * nu + r, k * nu + r) -= spec.beta;
        }
      }
    }
  }
  for (std::size_t i = 0; i < N * nu; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double m = 0.5 * (c.H(i, j) + c.H(j, i));
      c.H(i, j) = m;
      c.H(j, i) = m;
    }

  std::vector<double> rows;
  for (std::size_t k = 0; k < N; ++k) {
    for (std::size_t j = 0; j < nx; ++j) {
      if (!std::isfinite(spec.state_lb[j]) && !std::isfinite(spec.state_ub[j])) continue;
      const std::size_t row = k * nx + j;
      c.state_rows.push_back(row);
      const auto src = c.Gamma.row(row);
      rows.insert(rows.end(), src.begin(), src.end());
      c.clb.push_back(spec.state_lb[j]);
      c.cub.push_back(spec.state_ub[j]);
    }
  }
  c.G_c = DenseMatrix(c.state_rows.size(), N * nu, std::move(rows));

  Vector lb(N * nu), ub(N * nu);
  for (std::size_t k = 0; k < N; ++k)
    for (std::size_t r = 0; r < nu; ++r) {
      lb[k * nu + r] = spec.u_min[r];
      ub[k * nu + r] = spec.u_max[r];
    }
  c.box = make_box(std::move(lb), std::move(ub));
  return c;
}

Vector CondensedQp::linear_term(std::span<const double> x0, std::span<const double> u_prev) const {
  if (x0.size() != nx || u_prev.size() != nu) throw DimensionError("MPC: state/input length mismatch");
  Vector q = mat_vec(F, x0);
  for (std::size_t r = 0; r < nu; ++r) q[r] -= beta * u_prev[r];
  return q;
}

Vector CondensedQp::offsets(std::span<const double> x0) const {
  if (x0.size() != nx) throw DimensionError("MPC: state length mismatch");
  Vector g(state_rows.size());
  for (std::size_t i = 0; i < state_rows.size(); ++i) g[i] = dot(Phi.row(state_rows[i]), x0);
  return g;
}

QpProblem CondensedQp::problem(std::span<const double> x0, std::span<const double> u_prev) const {
  QpProblem p;
  p.Q = H;
  p.q = linear_term(x0, u_prev);
  p.box = box;
  p.Gbar = G_c;
  p.gbar = offsets(x0);
  p.clb = clb;
  p.cub = cub;
  return p;
}

double rollout_cost(const LtiModel& model, const MpcSpec& spec, std::span<const double> x0,
                    std::span<const double> u_prev, std::span<const double> U) {
  check_spec(model, spec);
  const std::size_t nx = model.nx(), nu = model.nu();
  if (U.size() != spec.N * nu) throw DimensionError("rollout_cost: U must have N*nu entries");
  Vector x(x0.begin(), x0.end());
  Vector prev(u_prev.begin(), u_prev.end());
  double J = 0.0;
  for (std::size_t k = 0; k < spec.N; ++k) {
    const auto u = U.subspan(k * nu, nu);
    Vector next = mat_vec(model.A, x);
    axpy(1.0, mat_vec(model.B, u), next);
    x = std::move(next);
    J += 0.5 * dot(x, mat_vec(spec.Q_stage, x));
    J += 0.5 * dot(u, mat_vec(spec.R_stage, u));
    for (std::size_t r = 0; r < nu; ++r) J += 0.5 * spec.beta * (u[r] - prev[r]) * (u[r] - prev[r]);
    prev.assign(u.begin(), u.end());
  }
  (void)nx;
  return J;
}

MpcTrajectory simulate_closed_loop(const LtiModel& model, const MpcSpec& spec,
                                   std::span<const double> x0, const MpcSolverConfig& solver,
                                   std::int64_t steps, const DisturbanceConfig& dist) {
  if (steps < 1) throw std::invalid_argument("simulate_closed_loop: steps must be >= 1");
  const CondensedQp cqp = condense(model, spec);
  const std::size_t nx = cqp.nx, nu = cqp.nu, N = cqp.N;
  if (x0.size() != nx) throw DimensionError("simulate_closed_loop: x0 length != nx");

  Vector x(x0.begin(), x0.end());
  Vector u_prev(nu, 0.0);
  NormalizedQp np = normalize(cqp.problem(x, u_prev));
  ProblemConstants consts = constants(np);

  MpcTrajectory traj;
  SolveConfig cfg = solver.solve;
  Vector u_warm, y_warm;
  for (std::int64_t t = 0; t < steps; ++t) {
    MpcStep step;
    step.t = t;
    if (dist.period > 0 && t > 0 && t % dist.period == 0) {
      x[dist.theta_index] += dist.theta_kick;
      x[dist.hdot_index] += dist.hdot_kick;
      step.disturbed = true;
    }
    step.x = x;

    np.q = cqp.linear_term(x, u_prev);
    refresh_offsets(np, cqp.offsets(x), cqp.clb, cqp.cub);
    double box_sq = 0.0;
    for (std::size_t i = 0; i < np.box.size(); ++i) {
      const double m = std::max(std::abs(np.box.lb[i]), std::abs(np.box.ub[i]));
      box_sq += m * m;
    }
    consts.Lbar_f = consts.L_f * std::sqrt(box_sq) + norm2(np.q);

    cfg.delta = solver.delta ? *solver.delta
                             : delta_rule(cfg.variant, cfg.recovery, cfg.eps, consts,
                                          consts.R_d_default);
    traj.delta_used = cfg.delta;
    cfg.y0 = solver.warm_start ? y_warm : Vector{};
    cfg.u_warm = solver.warm_start ? u_warm : Vector{};

    SolveResult res;
    try {
      res = solve(np, consts, cfg);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "MPC step " << t << ": " << e.what();
      throw std::runtime_error(os.str());
    }
    step.status = res.status;
    step.outer_iters = res.outer_iterations;
    step.inner_total = res.total_inner_iterations;
    step.u.assign(res.u_out.begin(), res.u_out.begin() + static_cast<std::ptrdiff_t>(nu));

    // Shift the input plan one step; keep the multipliers only after a
    // converged solve (they grow without bound on infeasible problems).
    u_warm.assign(N * nu, 0.0);
    for (std::size_t i = 0; i + nu < N * nu; ++i) u_warm[i] = res.u_out[i + nu];
    for (std::size_t r = 0; r < nu; ++r) u_warm[(N - 1) * nu + r] = res.u_out[(N - 1) * nu + r];
    if (res.status == SolveStatus::Converged) {
      y_warm = res.x_out;
    } else {
      y_warm.clear();
    }

    Vector next = mat_vec(model.A, x);
    axpy(1.0, mat_vec(model.B, step.u), next);
    x = std::move(next);
    u_prev = step.u;
    traj.steps.push_back(std::move(step));
  }
  traj.x_final = x;
  return traj;
}

namespace {

void put(std::string& out, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

}  // namespace

std::string trajectory_csv(const MpcTrajectory& traj) {
  std::string out = "t,h,hdot,theta,thetadot,u,outer_iters,solve_inner_total\n";
  for (const auto& s : traj.steps) {
    if (s.x.size() != 4 || s.u.size() != 1) {
      throw DimensionError("trajectory CSV expects 4 states and 1 input");
    }
    out += std::to_string(s.t);
    for (double v : s.x) {
      out += ',';
      put(out, v);
    }
    out += ',';
    put(out, s.u[0]);
    out += ',';
    out += std::to_string(s.outer_iters);
    out += ',';
    out += std::to_string(s.inner_total);
    out += '\n';
  }
  return out;
}

}  // namespace dualqp
