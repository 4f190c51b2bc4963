#include "dualqp/bench.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dualqp/certify.hpp"

namespace dualqp {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  return r * std::cos(a);
}

QpProblem random_qp(const RandomQpConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("RandomQpConfig: n must be >= 1");
  if (!(cfg.cond >= 1.0)) throw std::invalid_argument("RandomQpConfig: cond must be >= 1");
  if (!(cfg.box_halfwidth > 0.0)) throw std::invalid_argument("RandomQpConfig: box_halfwidth must be > 0");
  const std::size_t n = cfg.n, p = cfg.p;
  Rng rng(cfg.seed);

  DenseMatrix M(n, n);
  for (double& v : M.data()) v = rng.normal();
  QpProblem qp;
  if (cfg.cond == 1.0) {
    qp.Q = DenseMatrix::identity(n);
  } else {
    qp.Q = gram(M);
    const EigExtremes e = symmetric_eig_extremes(qp.Q);
    const double mu = std::max(0.0, (e.lambda_max - cfg.cond * e.lambda_min) / (cfg.cond - 1.0));
    for (std::size_t i = 0; i < n; ++i) qp.Q(i, i) += mu;
  }
  qp.q.resize(n);
  for (double& v : qp.q) v = rng.normal();
  qp.Gbar = DenseMatrix(p, n);
  for (double& v : qp.Gbar.data()) v = rng.normal();
  qp.box = make_box(Vector(n, -cfg.box_halfwidth), Vector(n, cfg.box_halfwidth));
  const Vector u0 = qp.box.center();
  const Vector Gu0 = p > 0 ? mat_vec(qp.Gbar, u0) : Vector{};
  qp.gbar.resize(p);
  for (std::size_t i = 0; i < p; ++i) qp.gbar[i] = -Gu0[i] - rng.uniform(0.1, 1.0);
  qp.clb.assign(p, -kInf);
  qp.cub.assign(p, 0.0);
  return qp;
}

bool oracle_feasible(std::size_t n, std::size_t p) {
  if (n > kOracleMaxVars) return false;
  return std::pow(3.0, static_cast<double>(n)) * std::pow(2.0, static_cast<double>(p)) <=
         kOracleCandidateLimit;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Face : std::uint8_t { Free, Lower, Upper };

struct KktCandidate {
  Vector u;
  Vector row_mult;  // size p, zero for inactive rows
  Vector box_mult;  // size n
  bool ok = false;
};

// Solves the equality-constrained QP with the given box faces fixed and the
// given rows active. ok is false when the KKT matrix is singular.
KktCandidate solve_face(const NormalizedQp& np, const std::vector<Face>& faces,
                        const std::vector<std::size_t>& rows) {
  const std::size_t n = np.num_vars();
  KktCandidate c;
  c.u.assign(n, 0.0);
  std::vector<std::size_t> free_idx;
  for (std::size_t i = 0; i < n; ++i) {
    if (faces[i] == Face::Lower) c.u[i] = np.box.lb[i];
    else if (faces[i] == Face::Upper) c.u[i] = np.box.ub[i];
    else free_idx.push_back(i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (faces[i] != Face::Free && !std::isfinite(c.u[i])) return c;
  }
  const std::size_t nf = free_idx.size(), na = rows.size();
  if (na > nf) return c;
  if (nf > 0) {
    MatrixXd K = MatrixXd::Zero(nf + na, nf + na);
    VectorXd rhs(nf + na);
    for (std::size_t a = 0; a < nf; ++a) {
      const std::size_t i = free_idx[a];
      double r = -np.q[i];
      for (std::size_t j = 0; j < n; ++j)
        if (faces[j] != Face::Free) r -= np.Q(i, j) * c.u[j];
      rhs(a) = r;
      for (std::size_t b = 0; b < nf; ++b) K(a, b) = np.Q(i, free_idx[b]);
    }
    for (std::size_t a = 0; a < na; ++a) {
      const auto grow = np.G.row(rows[a]);
      double r = -np.g[rows[a]];
      for (std::size_t j = 0; j < n; ++j)
        if (faces[j] != Face::Free) r -= grow[j] * c.u[j];
      rhs(nf + a) = r;
      for (std::size_t b = 0; b < nf; ++b) {
        K(nf + a, b) = grow[free_idx[b]];
        K(b, nf + a) = grow[free_idx[b]];
      }
    }
    Eigen::FullPivLU<MatrixXd> lu(K);
    lu.setThreshold(1e-11);
    if (!lu.isInvertible()) return c;
    const VectorXd sol = lu.solve(rhs);
    for (std::size_t a = 0; a < nf; ++a) c.u[free_idx[a]] = sol(a);
    c.row_mult.assign(np.num_constraints(), 0.0);
    for (std::size_t a = 0; a < na; ++a) c.row_mult[rows[a]] = sol(nf + a);
  } else {
    // Every coordinate fixed: only a zero-row active set is well posed.
    if (na > 0) return c;
    c.row_mult.assign(np.num_constraints(), 0.0);
  }
  // Box multipliers from the reduced gradient at fixed coordinates.
  Vector grad = mat_vec(np.Q, c.u);
  for (std::size_t i = 0; i < n; ++i) grad[i] += np.q[i];
  if (np.num_constraints() > 0) {
    Vector gt(n);
    mat_t_vec_into(np.G, c.row_mult, gt);
    axpy(1.0, gt, grad);
  }
  c.box_mult.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    if (faces[i] != Face::Free) c.box_mult[i] = -grad[i];
  c.ok = true;
  return c;
}

struct Violations {
  double primal = 0.0;  // worst bound / row violation
  double dual = 0.0;    // worst wrong-sign multiplier
};

Violations check(const NormalizedQp& np, const std::vector<Face>& faces, const KktCandidate& c) {
  Violations v;
  const std::size_t n = np.num_vars();
  for (std::size_t i = 0; i < n; ++i) {
    v.primal = std::max({v.primal, np.box.lb[i] - c.u[i], c.u[i] - np.box.ub[i]});
    if (faces[i] == Face::Lower) v.dual = std::max(v.dual, c.box_mult[i]);
    if (faces[i] == Face::Upper) v.dual = std::max(v.dual, -c.box_mult[i]);
  }
  const Vector gu = constraint_value(np, c.u);
  for (std::size_t r = 0; r < gu.size(); ++r) {
    v.primal = std::max(v.primal, gu[r]);
    v.dual = std::max(v.dual, -c.row_mult[r]);
  }
  return v;
}

double tolerance_scale(const NormalizedQp& np) {
  double s = 1.0;
  for (double v : np.q) s = std::max(s, std::abs(v));
  for (double v : np.g) s = std::max(s, std::abs(v));
  return s;
}

OracleSolution finish(const NormalizedQp& np, const std::vector<Face>& faces,
                      const std::vector<std::size_t>& rows, const KktCandidate& c) {
  OracleSolution s;
  s.u_star = c.u;
  s.f_star = objective(np, c.u);
  s.x_star = c.row_mult;
  s.box_mult = c.box_mult;
  s.active_rows = rows;
  // Stationarity with box multipliers folded in (they cancel fixed-coordinate
  // gradient entries by construction).
  Vector grad = lagrangian_grad(np, c.u, Vector(c.row_mult.size(), 0.0));
  if (np.num_constraints() > 0) {
    Vector gt(np.num_vars());
    mat_t_vec_into(np.G, c.row_mult, gt);
    axpy(1.0, gt, grad);
  }
  double res = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) res = std::max(res, std::abs(grad[i] + c.box_mult[i]));
  s.kkt_residual = res;
  const Vector gu = constraint_value(np, c.u);
  double comp = 0.0;
  for (std::size_t r = 0; r < gu.size(); ++r) comp = std::max(comp, std::abs(c.row_mult[r] * gu[r]));
  s.complementarity = comp;
  (void)faces;
  return s;
}

}  // namespace

OracleSolution oracle_solve(const NormalizedQp& np) {
  const std::size_t n = np.num_vars(), p = np.num_constraints();
  if (!oracle_feasible(n, p)) {
    std::ostringstream os;
    os << "oracle: 3^" << n << " * 2^" << p
       << " candidates exceed the enumeration limit; use high-accuracy reference mode";
    throw std::invalid_argument(os.str());
  }
  const double tol = 1e-9 * tolerance_scale(np);

  std::vector<Face> faces(n, Face::Free);
  std::vector<Face> best_faces;
  std::vector<std::size_t> rows, best_rows;
  KktCandidate best;
  double best_f = kInf;
  std::uint64_t count = 0;

  const std::uint64_t row_sets = std::uint64_t{1} << p;
  for (;;) {
    std::size_t nfree = 0;
    bool finite_faces = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (faces[i] == Face::Free) ++nfree;
      else if (!std::isfinite(faces[i] == Face::Lower ? np.box.lb[i] : np.box.ub[i])) finite_faces = false;
    }
    for (std::uint64_t mask = 0; mask < row_sets && finite_faces; ++mask) {
      ++count;
      rows.clear();
      for (std::size_t r = 0; r < p; ++r)
        if (mask >> r & 1U) rows.push_back(r);
      if (rows.size() > nfree) continue;
      KktCandidate c = solve_face(np, faces, rows);
      if (!c.ok) continue;
      const Violations v = check(np, faces, c);
      if (v.primal > tol || v.dual > tol) continue;
      const double f = objective(np, c.u);
      if (f < best_f) {
        best_f = f;
        best = std::move(c);
        best_faces = faces;
        best_rows = rows;
      }
    }
    // Next box face assignment (base-3 counter).
    std::size_t i = 0;
    while (i < n) {
      if (faces[i] == Face::Free) { faces[i] = Face::Lower; break; }
      if (faces[i] == Face::Lower) { faces[i] = Face::Upper; break; }
      faces[i] = Face::Free;
      ++i;
    }
    if (i == n) break;
  }
  if (!best.ok) {
    throw std::runtime_error("oracle: no active set satisfies the KKT conditions (degenerate problem)");
  }
  OracleSolution s = finish(np, best_faces, best_rows, best);
  s.candidates = count;
  return s;
}

namespace {

// Primal-dual active-set refinement from a guessed active set.
std::optional<OracleSolution> polish(const NormalizedQp& np, std::span<const double> u,
                                     std::span<const double> x) {
  const std::size_t n = np.num_vars(), p = np.num_constraints();
  const double scale = tolerance_scale(np);
  const double ident = 1e-6 * scale;
  const double tol = 1e-9 * scale;
  std::vector<Face> faces(n, Face::Free);
  for (std::size_t i = 0; i < n; ++i) {
    if (u[i] - np.box.lb[i] <= ident) faces[i] = Face::Lower;
    else if (np.box.ub[i] - u[i] <= ident) faces[i] = Face::Upper;
  }
  const Vector gu = constraint_value(np, u);
  std::vector<char> active(p, 0);
  for (std::size_t r = 0; r < p; ++r) active[r] = gu[r] >= -ident || x[r] > ident;

  for (int round = 0; round < 100; ++round) {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < p; ++r)
      if (active[r]) rows.push_back(r);
    KktCandidate c = solve_face(np, faces, rows);
    if (!c.ok) {
      // Drop the active row with the smallest multiplier estimate and retry.
      if (rows.empty()) return std::nullopt;
      std::size_t drop = rows.front();
      for (std::size_t r : rows)
        if (x[r] < x[drop]) drop = r;
      active[drop] = 0;
      continue;
    }
    const Violations v = check(np, faces, c);
    if (v.primal <= tol && v.dual <= tol) return finish(np, faces, rows, c);
    bool changed = false;
    for (std::size_t r = 0; r < p; ++r) {
      if (active[r] && c.row_mult[r] < -tol) { active[r] = 0; changed = true; }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (faces[i] == Face::Lower && c.box_mult[i] > tol) { faces[i] = Face::Free; changed = true; }
      if (faces[i] == Face::Upper && c.box_mult[i] < -tol) { faces[i] = Face::Free; changed = true; }
    }
    if (!changed) {
      const Vector g2 = constraint_value(np, c.u);
      for (std::size_t r = 0; r < p; ++r)
        if (!active[r] && g2[r] > tol) { active[r] = 1; changed = true; }
      for (std::size_t i = 0; i < n; ++i) {
        if (faces[i] != Face::Free) continue;
        if (c.u[i] < np.box.lb[i] - tol) { faces[i] = Face::Lower; changed = true; }
        else if (c.u[i] > np.box.ub[i] + tol) { faces[i] = Face::Upper; changed = true; }
      }
    }
    if (!changed) return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace

OracleSolution reference_solve(const NormalizedQp& np, const ProblemConstants& consts,
                               const ReferenceConfig& cfg) {
  SolveConfig sc;
  sc.variant = Variant::IDFGM;
  sc.recovery = Recovery::LastIterate;
  sc.delta = cfg.delta;
  sc.dual_gap_stop = true;
  sc.max_outer = cfg.max_outer;

  // Coarse solve, polish; tighten only if the identified face fails KKT.
  for (double gap : {1e-5, cfg.gap}) {
    sc.eps = std::max(gap, cfg.gap);
    const SolveResult r = solve(np, consts, sc);
    if (auto s = polish(np, r.u_out, r.x_out)) return *s;
    sc.y0 = r.x_out;
    sc.u_warm = r.u_out;
    if (gap <= cfg.gap) {
      OracleSolution s;
      s.u_star = r.u_out;
      s.f_star = r.f;
      s.x_star = r.x_out;
      s.box_mult.assign(np.num_vars(), 0.0);
      return s;
    }
  }
  throw std::logic_error("reference_solve: unreachable");
}

OracleSolution best_solution(const NormalizedQp& np, const ProblemConstants& consts) {
  if (oracle_feasible(np.num_vars(), np.num_constraints())) return oracle_solve(np);
  return reference_solve(np, consts);
}

namespace {

void put(std::string& out, double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, r.ptr);
}

template <typename Task>
void run_pool(std::size_t count, std::size_t jobs, Task task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = next++; i < count; i = next++) task(i);
      } catch (...) {
        errors[w] = std::current_exception();
        next = count;
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

std::vector<SensitivityRow> run_sensitivity(const SensitivityConfig& cfg) {
  const QpProblem qp = random_qp(cfg.problem);
  const NormalizedQp np = normalize(qp);
  const ProblemConstants consts = constants(np);
  const OracleSolution ref = best_solution(np, consts);

  std::vector<double> deltas = cfg.deltas;
  if (deltas.empty()) {
    deltas.push_back(delta_rule(Variant::IDGM, Recovery::Average, cfg.eps, consts, consts.R_d_default));
    deltas.push_back(delta_rule(Variant::IDFGM, Recovery::Average, cfg.eps, consts, consts.R_d_default));
  }
  std::vector<SensitivityRow> rows;
  for (Variant v : {Variant::IDGM, Variant::IDFGM}) {
    for (double d : deltas) {
      SolveConfig sc;
      sc.variant = v;
      sc.recovery = Recovery::Average;
      sc.eps = cfg.eps;
      sc.delta = d;
      sc.dual_gap_stop = false;
      sc.max_outer = cfg.iterations;
      const SolveResult r = solve(np, consts, sc);
      for (const auto& t : r.trace) {
        rows.push_back({v, d, t.k, std::abs(t.f - ref.f_star), t.infeas});
      }
    }
  }
  return rows;
}

std::string sensitivity_csv(const std::vector<SensitivityRow>& rows) {
  std::string out = "variant,delta,k,subopt,infeas\n";
  for (const auto& r : rows) {
    out += to_string(r.variant);
    out += ',';
    put(out, r.delta);
    out += ',';
    out += std::to_string(r.k);
    out += ',';
    put(out, r.subopt);
    out += ',';
    put(out, r.infeas);
    out += '\n';
  }
  return out;
}

std::vector<ScalingRow> run_scaling(const ScalingConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("run_scaling: trials must be >= 1");
  struct Cell {
    std::size_t n;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (std::size_t n : cfg.dims)
    for (std::int64_t t = 0; t < cfg.trials; ++t) cells.push_back({n, cfg.seed + static_cast<std::uint64_t>(t)});

  constexpr Variant kVariants[] = {Variant::IDGM, Variant::IDFGM};
  constexpr Recovery kRecoveries[] = {Recovery::LastIterate, Recovery::Average};
  std::vector<ScalingRow> rows(cells.size() * 4);

  run_pool(cells.size(), cfg.jobs, [&](std::size_t c) {
    const std::size_t n = cells[c].n;
    const std::size_t p = static_cast<std::size_t>(std::ceil(1.5 * static_cast<double>(n)));
    RandomQpConfig rc;
    rc.n = n;
    rc.p = p;
    rc.seed = cells[c].seed;
    rc.cond = cfg.cond;
    const NormalizedQp np = normalize(random_qp(rc));
    const ProblemConstants consts = constants(np);
    const OracleSolution ref = best_solution(np, consts);
    std::size_t slot = c * 4;
    for (Variant v : kVariants) {
      for (Recovery r : kRecoveries) {
        SolveConfig sc;
        sc.variant = v;
        sc.recovery = r;
        sc.eps = cfg.eps;
        sc.delta = delta_rule(v, r, cfg.eps, consts, consts.R_d_default);
        sc.f_ref = ref.f_star;
        sc.max_outer = cfg.max_outer;
        const auto t0 = std::chrono::steady_clock::now();
        const SolveResult res = solve(np, consts, sc);
        const auto t1 = std::chrono::steady_clock::now();
        ScalingRow& row = rows[slot++];
        row.n = n;
        row.p = p;
        row.seed = rc.seed;
        row.variant = v;
        row.recovery = r;
        row.outer_iters = res.outer_iterations;
        row.total_inner_iters = res.total_inner_iterations;
        row.status = res.status;
        row.wall_ms = cfg.deterministic
                          ? 0.0
                          : std::chrono::duration<double, std::milli>(t1 - t0).count();
      }
    }
  });
  return rows;
}

std::string scaling_csv(const std::vector<ScalingRow>& rows) {
  std::string out = "n,p,seed,variant,recovery,outer_iters,total_inner_iters,wall_ms\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n) + ',' + std::to_string(r.p) + ',' + std::to_string(r.seed) + ',' +
           to_string(r.variant) + ',' + to_string(r.recovery) + ',' +
           std::to_string(r.outer_iters) + ',' + std::to_string(r.total_inner_iters) + ',';
    put(out, r.wall_ms);
    out += '\n';
  }
  return out;
}

}  // namespace dualqp
