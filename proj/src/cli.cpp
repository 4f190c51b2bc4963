#include "dualqp/cli.hpp"

#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dualqp/bench.hpp"
#include "dualqp/certify.hpp"
#include "dualqp/io.hpp"
#include "dualqp/mpc.hpp"
#include "dualqp/outer.hpp"

namespace dualqp {

namespace {

struct SolveOpts {
  std::string input;
  std::string algorithm = "idfgm";
  std::string recovery = "last";
  double eps = 1e-2;
  std::optional<double> delta;
  std::int64_t max_outer = 100000;
  std::optional<double> rd;
  std::optional<double> f_ref;
  bool horizon = false;
  std::string trace;
  std::string output;
};

struct CertifyOpts {
  std::string input;
  std::string algorithm = "idfgm";
  std::string recovery = "last";
  double eps = 1e-2;
  std::optional<double> rd;
};

struct SensitivityOpts {
  std::size_t n = 50;
  std::size_t p = 75;
  std::uint64_t seed = 1;
  double cond = 100.0;
  double eps = 1e-2;
  std::vector<double> deltas;
  std::int64_t iterations = 500;
  std::string output;
};

struct ScalingOpts {
  std::vector<std::size_t> dims{10, 50, 100, 200, 500};
  std::int64_t trials = 3;
  std::uint64_t seed = 1;
  double cond = 100.0;
  double eps = 1e-2;
  std::int64_t max_outer = 20000;
  std::size_t jobs = 1;
  bool deterministic = false;
  std::string output;
};

struct MpcOpts {
  std::int64_t steps = 200;
  double eps = 1e-2;
  std::string algorithm = "idgm";
  std::string recovery = "last";
  std::optional<double> delta;
  std::int64_t max_outer = 3000;
  double beta = 0.1;
  std::string angle_unit = "rad";
  std::int64_t period = 20;
  std::string output;
};

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") out << text;
  else write_text(path, text);
}

int status_code(SolveStatus s) { return s == SolveStatus::Converged ? 0 : 2; }

int run_solve(const SolveOpts& o, std::ostream& out, std::ostream& err) {
  const QpProblem qp = load_problem(o.input);
  const NormalizedQp np = normalize(qp);
  const ProblemConstants consts = constants(np);
  SolveConfig cfg;
  cfg.variant = parse_variant(o.algorithm);
  cfg.recovery = parse_recovery(o.recovery);
  cfg.eps = o.eps;
  cfg.max_outer = o.max_outer;
  cfg.f_ref = o.f_ref;

  std::optional<Certificate> cert;
  try {
    cert = certificate(consts, cfg.variant, cfg.recovery, o.eps, o.rd);
  } catch (const CertificateUnavailable& e) {
    if (!o.delta || o.horizon) throw;
    err << "warning: " << e.what() << "; running with --delta and no guarantee\n";
  }
  if (cert)
    for (const auto& w : cert->warnings) err << "warning: " << w << "\n";
  if (o.delta) {
    cfg.delta = *o.delta;
    if (cert && *o.delta > cert->delta) {
      err << "warning: --delta " << *o.delta << " exceeds the certified " << cert->delta
          << "; only the delta-plateau bounds apply\n";
    }
  } else {
    cfg.delta = cert->delta;
  }
  if (o.horizon) cfg.outer_horizon = cert->outer_bound;

  const SolveResult r = solve(np, consts, cfg);
  if (!o.trace.empty()) write_text(o.trace, trace_csv(r.trace));
  emit(out, o.output, to_json(r).dump(1) + "\n");
  return status_code(r.status);
}

int run_certify(const CertifyOpts& o, std::ostream& out, std::ostream& err) {
  const QpProblem qp = load_problem(o.input);
  const ProblemConstants consts = constants(normalize(qp));
  const Certificate c =
      certificate(consts, parse_variant(o.algorithm), parse_recovery(o.recovery), o.eps, o.rd);
  for (const auto& w : c.warnings) err << "warning: " << w << "\n";
  out << to_json(c).dump(1) << "\n";
  return 0;
}

int run_sens(const SensitivityOpts& o, std::ostream& out) {
  SensitivityConfig cfg;
  cfg.problem.n = o.n;
  cfg.problem.p = o.p;
  cfg.problem.seed = o.seed;
  cfg.problem.cond = o.cond;
  cfg.eps = o.eps;
  cfg.deltas = o.deltas;
  cfg.iterations = o.iterations;
  emit(out, o.output, sensitivity_csv(run_sensitivity(cfg)));
  return 0;
}

int run_scale(const ScalingOpts& o, std::ostream& out) {
  ScalingConfig cfg;
  cfg.dims = o.dims;
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.cond = o.cond;
  cfg.eps = o.eps;
  cfg.max_outer = o.max_outer;
  cfg.jobs = o.jobs;
  cfg.deterministic = o.deterministic;
  emit(out, o.output, scaling_csv(run_scaling(cfg)));
  return 0;
}

int run_mpc(const MpcOpts& o, std::ostream& out, std::ostream& err) {
  AngleUnit unit;
  if (o.angle_unit == "rad") unit = AngleUnit::Radians;
  else if (o.angle_unit == "deg") unit = AngleUnit::Degrees;
  else throw std::invalid_argument("--angle-unit must be rad or deg");
  MpcSolverConfig sc;
  sc.solve.variant = parse_variant(o.algorithm);
  sc.solve.recovery = parse_recovery(o.recovery);
  sc.solve.eps = o.eps;
  sc.solve.max_outer = o.max_outer;
  sc.delta = o.delta;
  DisturbanceConfig dist;
  dist.period = o.period;
  const Vector x0{0.0, 0.0, 0.5, -0.35};
  const MpcTrajectory traj = simulate_closed_loop(
      balancing_robot_model(), balancing_robot_spec(o.beta, unit), x0, sc, o.steps, dist);
  emit(out, o.output, trajectory_csv(traj));
  std::int64_t capped = 0;
  for (const auto& s : traj.steps)
    if (s.status != SolveStatus::Converged) ++capped;
  if (capped > 0) err << "warning: " << capped << " MPC steps stopped at the outer iteration cap\n";
  return capped > 0 ? 2 : 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inexact dual (fast) gradient QP solver", "dualqp"};
  app.require_subcommand(1);

  SolveOpts so;
  auto* solve_cmd = app.add_subcommand("solve", "Solve a QP given as JSON");
  solve_cmd->add_option("-i,--input", so.input, "Problem JSON")->required();
  solve_cmd->add_option("--algorithm", so.algorithm, "idgm or idfgm")->check(CLI::IsMember({"idgm", "idfgm"}));
  solve_cmd->add_option("--recovery", so.recovery, "last or average")->check(CLI::IsMember({"last", "average"}));
  solve_cmd->add_option("--eps", so.eps, "Target accuracy")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--delta", so.delta, "Inner accuracy (overrides the certificate)")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-outer", so.max_outer, "Outer iteration cap")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--rd", so.rd, "Dual radius for the certificate")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--f-ref", so.f_ref, "Known optimal value; enables the |f - f*| stop");
  solve_cmd->add_flag("--horizon", so.horizon, "Stop at the certified outer bound");
  solve_cmd->add_option("--trace", so.trace, "Trace CSV path");
  solve_cmd->add_option("-o,--output", so.output, "Result JSON path (default stdout)");

  CertifyOpts co;
  auto* cert_cmd = app.add_subcommand("certify", "Print the complexity certificate");
  cert_cmd->add_option("-i,--input", co.input, "Problem JSON")->required();
  cert_cmd->add_option("--algorithm", co.algorithm)->check(CLI::IsMember({"idgm", "idfgm"}));
  cert_cmd->add_option("--recovery", co.recovery)->check(CLI::IsMember({"last", "average"}));
  cert_cmd->add_option("--eps", co.eps)->check(CLI::PositiveNumber);
  cert_cmd->add_option("--rd", co.rd)->check(CLI::PositiveNumber);

  SensitivityOpts se;
  auto* sens_cmd = app.add_subcommand("bench-sensitivity", "Suboptimality traces for several inner accuracies");
  sens_cmd->add_option("--n", se.n)->check(CLI::PositiveNumber);
  sens_cmd->add_option("--p", se.p);
  sens_cmd->add_option("--seed", se.seed);
  sens_cmd->add_option("--cond", se.cond)->check(CLI::Range(1.0, 1e12));
  sens_cmd->add_option("--eps", se.eps)->check(CLI::PositiveNumber);
  sens_cmd->add_option("--deltas", se.deltas, "Inner accuracies (default: certificate values)")->delimiter(',');
  sens_cmd->add_option("--iterations", se.iterations)->check(CLI::PositiveNumber);
  sens_cmd->add_option("-o,--output", se.output, "CSV path (default stdout)");

  ScalingOpts sc;
  auto* scale_cmd = app.add_subcommand("bench-scaling", "Outer iterations across problem sizes");
  scale_cmd->add_option("--dims", sc.dims)->delimiter(',');
  scale_cmd->add_option("--trials", sc.trials)->check(CLI::PositiveNumber);
  scale_cmd->add_option("--seed", sc.seed);
  scale_cmd->add_option("--cond", sc.cond)->check(CLI::Range(1.0, 1e12));
  scale_cmd->add_option("--eps", sc.eps)->check(CLI::PositiveNumber);
  scale_cmd->add_option("--max-outer", sc.max_outer)->check(CLI::PositiveNumber);
  scale_cmd->add_option("--jobs", sc.jobs)->check(CLI::PositiveNumber);
  scale_cmd->add_flag("--deterministic", sc.deterministic, "Write wall_ms as 0");
  scale_cmd->add_option("-o,--output", sc.output, "CSV path (default stdout)");

  MpcOpts mo;
  auto* mpc_cmd = app.add_subcommand("mpc", "Closed-loop balancing robot simulation");
  mpc_cmd->add_option("--steps", mo.steps)->check(CLI::PositiveNumber);
  mpc_cmd->add_option("--eps", mo.eps)->check(CLI::PositiveNumber);
  mpc_cmd->add_option("--algorithm", mo.algorithm)->check(CLI::IsMember({"idgm", "idfgm"}));
  mpc_cmd->add_option("--recovery", mo.recovery)->check(CLI::IsMember({"last", "average"}));
  mpc_cmd->add_option("--delta", mo.delta)->check(CLI::PositiveNumber);
  mpc_cmd->add_option("--max-outer", mo.max_outer)->check(CLI::PositiveNumber);
  mpc_cmd->add_option("--beta", mo.beta)->check(CLI::NonNegativeNumber);
  mpc_cmd->add_option("--angle-unit", mo.angle_unit, "rad or deg");
  mpc_cmd->add_option("--disturbance-period", mo.period)->check(CLI::NonNegativeNumber);
  mpc_cmd->add_option("-o,--output", mo.output, "CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*solve_cmd) return run_solve(so, out, err);
    if (*cert_cmd) return run_certify(co, out, err);
    if (*sens_cmd) return run_sens(se, out);
    if (*scale_cmd) return run_scale(sc, out);
    if (*mpc_cmd) return run_mpc(mo, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace dualqp
