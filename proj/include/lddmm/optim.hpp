#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lddmm/geodesics.hpp"
#include "lddmm/model.hpp"
#include "lddmm/shapes.hpp"

namespace lddmm {

struct ArmijoOptions {
  double c1 = 1e-4;
  double shrink = 0.5;
  int max_backtracks = 40;
  double initial_step = 1.0;
};

struct AlOptions {
  double mu0 = 1.0;
  double mu_shrink = 0.5;
  double mu_min = 1e-6;
  double constraint_tol = 1e-6;
};

struct SolverOptions {
  int steps = 100;
  int max_outer_iters = 20;
  int max_inner_iters = 200;
  double grad_tol = 1e-6;
  /// Shift delta in the (K + delta * mean diag K) preconditioner of the descent directions.
  double preconditioner_shift = 1e-3;
  ArmijoOptions armijo;
  AlOptions al;

  void validate() const;
};

enum class Termination { Converged, Stalled, MaxIterations };
std::string termination_name(Termination t);

struct SolveReport {
  std::string solver;
  double objective = 0.0;
  double kinetic = 0.0;
  double attachment = 0.0;
  double max_violation = 0.0;
  int iterations = 0;
  int outer_iterations = 0;
  std::vector<double> objectives;  // accepted working objectives, in order
  std::vector<double> grad_norms;
  std::vector<double> mu_history;
  std::vector<double> lambda_norms;
  std::vector<double> violations;
  Termination termination = Termination::Converged;
  /// Experiment-specific diagnostics (volume drift, stitched mismatch, ...), in insertion order.
  std::vector<std::pair<std::string, double>> metrics;
};

/// Matching of q0 onto target under a shape model: E + g(q(1)).
struct MatchProblem {
  MatchProblem(ShapeModel model, LandmarkState q0, LandmarkState target, double attachment_weight = 1.0);

  ShapeModel model;
  LandmarkState q0;
  LandmarkState target;
  double attachment_weight;

  /// Per-group normalized landmark attachment.
  AttachmentValue attach(const Vector& q) const;
};

// ---- shared descent ---------------------------------------------------------

struct DescentFunctions {
  std::function<double(const Vector&)> value;
  /// Value and gradient; the gradient is written to `grad`.
  std::function<double(const Vector&, Vector& grad)> value_grad;
  /// Search direction at x given the gradient; -grad when empty.
  std::function<Vector(const Vector& x, const Vector& grad)> direction;
};

struct DescentResult {
  Vector x;
  Vector grad;
  double value = 0.0;
  int iterations = 0;
  std::vector<double> values;
  std::vector<double> grad_norms;
  Termination termination = Termination::Converged;
};

/// Backtracking descent; stops when |grad| <= grad_tol (1 + |grad_0|).
DescentResult armijo_descent(const DescentFunctions& fns, Vector x0, int max_iters, double grad_tol,
                             const ArmijoOptions& armijo);

// ---- shooting ---------------------------------------------------------------

struct ShootingEval {
  double objective = 0.0;
  double kinetic = 0.0;
  double attachment = 0.0;
  Vector grad;
  Trajectory traj;
};

/// J(p0) = H(q0, p0) + g(q(1)) and its gradient q_dot(0) + alpha(1).
ShootingEval shooting_objective_grad(const MatchProblem& problem, const Vector& p0, const SolverOptions& opts);
/// Value only (no backward sweep).
ShootingEval shooting_objective(const MatchProblem& problem, const Vector& p0, const SolverOptions& opts);

struct ShootingResult {
  Vector p0;
  Trajectory traj;
  SolveReport report;
};

ShootingResult minimize_shooting(const MatchProblem& problem, const Vector& p0_init, const SolverOptions& opts);

// ---- augmented Lagrangian ------------------------------------------------------

using Controls = std::vector<Vector>;

struct AlEval {
  double value = 0.0;  // J_A
  double kinetic = 0.0;
  double attachment = 0.0;
  double penalty = 0.0;
  Controls grad;  // dJ_A / du_i (Euclidean)
  Trajectory traj;
};

/// Discrete augmented Lagrangian of piecewise-constant controls and its exact
/// gradient through the RK4 steps.
AlEval al_gradient(const MatchProblem& problem, const Controls& u, const Controls& lambda, double mu,
                   bool with_gradient = true);

struct AlResult {
  Controls u;
  Controls lambda;
  Trajectory traj;
  SolveReport report;
};

AlResult minimize_augmented_lagrangian(const MatchProblem& problem, const SolverOptions& opts);

/// max_i |c_i| over the step-averaged constraint values of a controlled trajectory.
double max_step_violation(const Trajectory& traj);

// ---- brute-force oracle -------------------------------------------------------

struct OracleResult {
  double objective = 0.0;  // kinetic + attachment of the returned controls
  double max_violation = 0.0;
  Controls u;
  long evaluations = 0;
};

/// Derivative-free compass search over all controls of the N-step problem with
/// an escalating quadratic constraint penalty. Tiny instances only.
OracleResult brute_force_oracle(const MatchProblem& problem, int steps, int grid_resolution);

}  // namespace lddmm
