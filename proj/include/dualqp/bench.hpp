#pragma once

// Random QP generation, an exact brute-force oracle for small instances, a
// high-accuracy reference for larger ones, and the sensitivity / scaling
// experiment runners.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dualqp/linalg.hpp"
#include "dualqp/outer.hpp"
#include "dualqp/problem.hpp"

namespace dualqp {

/// std::mt19937_64 stream; normals by the Box-Muller transform, uniforms from
/// the top 53 bits. Both are fixed so streams match across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct RandomQpConfig {
  std::size_t n = 10;
  std::size_t p = 15;
  std::uint64_t seed = 1;
  double cond = 100.0;
  double box_halfwidth = 10.0;
};

/// Q = M'M + mu I with mu chosen so cond(Q) = cond; rows G u + g <= 0 with
/// g = -G u0 - s, s ~ U[0.1, 1], u0 the box center (a Slater point).
QpProblem random_qp(const RandomQpConfig& cfg);

struct OracleSolution {
  Vector u_star;
  double f_star = 0.0;
  Vector x_star;   // multipliers of the normalized rows
  Vector box_mult; // signed: > 0 at ub, < 0 at lb
  std::vector<std::size_t> active_rows;
  std::uint64_t candidates = 0;
  double kkt_residual = 0.0;
  double complementarity = 0.0;
};

/// Largest 3^n 2^p the enumeration accepts.
inline constexpr double kOracleCandidateLimit = 1e7;
inline constexpr std::size_t kOracleMaxVars = 12;

bool oracle_feasible(std::size_t n, std::size_t p);

/// Active-set enumeration over box faces and constraint rows; each candidate
/// is an equality-constrained QP solved through its KKT system.
OracleSolution oracle_solve(const NormalizedQp& np);

struct ReferenceConfig {
  double delta = 1e-12;
  double gap = 1e-9;
  std::int64_t max_outer = 1000000;
};

/// High-accuracy self-solve (IDFGM, last iterate) followed by an active-set
/// polish: the rows and bounds the iterate identifies as active are solved
/// exactly and accepted if the KKT conditions hold.
OracleSolution reference_solve(const NormalizedQp& np, const ProblemConstants& consts,
                               const ReferenceConfig& cfg = {});

/// Oracle when enumeration is affordable, reference mode otherwise.
OracleSolution best_solution(const NormalizedQp& np, const ProblemConstants& consts);

struct SensitivityRow {
  Variant variant = Variant::IDGM;
  double delta = 0.0;
  std::int64_t k = 0;
  double subopt = 0.0;  // |f(u_hat^k) - f*|
  double infeas = 0.0;
};

struct SensitivityConfig {
  RandomQpConfig problem{50, 75, 1, 100.0, 10.0};
  double eps = 1e-2;
  std::vector<double> deltas;  // empty: the two certificate values
  std::int64_t iterations = 500;
};

std::vector<SensitivityRow> run_sensitivity(const SensitivityConfig& cfg);
std::string sensitivity_csv(const std::vector<SensitivityRow>& rows);

struct ScalingRow {
  std::size_t n = 0, p = 0;
  std::uint64_t seed = 0;
  Variant variant = Variant::IDGM;
  Recovery recovery = Recovery::LastIterate;
  std::int64_t outer_iters = 0;
  std::int64_t total_inner_iters = 0;
  SolveStatus status = SolveStatus::MaxIterations;
  double wall_ms = 0.0;
};

struct ScalingConfig {
  std::vector<std::size_t> dims{10, 50, 100, 200, 500};
  std::int64_t trials = 3;
  std::uint64_t seed = 1;
  double eps = 1e-2;
  double cond = 100.0;
  std::int64_t max_outer = 20000;
  std::size_t jobs = 1;
  bool deterministic = false;  // report wall_ms as 0
};

/// p = ceil(1.5 n); all four variant/recovery pairs per (n, seed) with the
/// certificate delta and the |f - f*| <= eps, ||[g]_+|| <= eps stop.
std::vector<ScalingRow> run_scaling(const ScalingConfig& cfg);
std::string scaling_csv(const std::vector<ScalingRow>& rows);

}  // namespace dualqp
