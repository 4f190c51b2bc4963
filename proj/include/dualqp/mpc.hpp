#pragma once

// Condensed linear MPC. For x_{k+1} = A x_k + B u_k, k = 0..N-1, the stacked
// prediction X = Phi x0 + Gamma U turns
//
//   1/2 sum_{k=1..N} x_k' Q x_k + 1/2 sum_k u_k' R u_k + beta/2 sum_k |u_k - u_{k-1}|^2
//
// into 1/2 U'HU + q(x0, u_prev)'U over the input box, with state bounds on
// steps 1..N as linear rows. Only q and the row offsets depend on x0.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dualqp/linalg.hpp"
#include "dualqp/outer.hpp"
#include "dualqp/problem.hpp"

namespace dualqp {

struct LtiModel {
  DenseMatrix A;  // nx x nx
  DenseMatrix B;  // nx x nu

  std::size_t nx() const { return A.rows(); }
  std::size_t nu() const { return B.cols(); }
};

/// Discrete (T = 8 ms) self-balancing robot, state (h, hdot, theta, thetadot).
LtiModel balancing_robot_model();

struct MpcSpec {
  std::size_t N = 10;
  DenseMatrix Q_stage;
  DenseMatrix R_stage;
  double beta = 0.0;
  Vector u_min, u_max;          // per input
  Vector state_lb, state_ub;    // per state, +-inf for unconstrained
};

enum class AngleUnit { Radians, Degrees };

/// Q = diag(1, 1, 600, 1), R = 2, N = 10, |u| <= 12, |h| <= 0.5, |theta| <= 15 deg
/// (converted to radians unless the model angle is taken in degrees).
MpcSpec balancing_robot_spec(double beta = 0.1, AngleUnit unit = AngleUnit::Radians);

struct CondensedQp {
  std::size_t nx = 0, nu = 0, N = 0;
  DenseMatrix Phi;    // (N nx) x nx
  DenseMatrix Gamma;  // (N nx) x (N nu)
  DenseMatrix H;
  DenseMatrix F;      // Gamma' Qbar Phi, so q = F x0 - beta e_0 u_prev
  double beta = 0.0;
  DenseMatrix G_c;    // selected rows of Gamma
  std::vector<std::size_t> state_rows;  // row of Phi/Gamma per constraint row
  Vector clb, cub;
  Box box;

  Vector linear_term(std::span<const double> x0, std::span<const double> u_prev) const;
  Vector offsets(std::span<const double> x0) const;
  QpProblem problem(std::span<const double> x0, std::span<const double> u_prev) const;
};

CondensedQp condense(const LtiModel& model, const MpcSpec& spec);

/// Unconstrained N-step rollout cost (the function condense() expands).
double rollout_cost(const LtiModel& model, const MpcSpec& spec, std::span<const double> x0,
                    std::span<const double> u_prev, std::span<const double> U);

struct DisturbanceConfig {
  std::int64_t period = 20;  // 0 disables
  std::size_t theta_index = 2;
  double theta_kick = 0.05;
  std::size_t hdot_index = 1;
  double hdot_kick = -0.05;
};

struct MpcSolverConfig {
  SolveConfig solve;  // eps, variant, recovery, max_outer
  // Empty: the last-iterate / average certificate delta with the default R_d.
  std::optional<double> delta;
  bool warm_start = true;
};

struct MpcStep {
  std::int64_t t = 0;
  Vector x;  // state at t, before the input is applied
  Vector u;  // applied input
  std::int64_t outer_iters = 0;
  std::int64_t inner_total = 0;
  SolveStatus status = SolveStatus::MaxIterations;
  bool disturbed = false;  // a kick was added to x at this step
};

struct MpcTrajectory {
  std::vector<MpcStep> steps;
  Vector x_final;
  double delta_used = 0.0;
};

MpcTrajectory simulate_closed_loop(const LtiModel& model, const MpcSpec& spec,
                                   std::span<const double> x0, const MpcSolverConfig& solver,
                                   std::int64_t steps, const DisturbanceConfig& dist);

/// "t,h,hdot,theta,thetadot,u,outer_iters,solve_inner_total" (4 states, 1 input).
std::string trajectory_csv(const MpcTrajectory& traj);

}  // namespace dualqp
