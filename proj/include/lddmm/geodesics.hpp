#pragma once

#include <vector>

#include "lddmm/model.hpp"

namespace lddmm {

/// Right-hand side of the (possibly constrained) landmark Hamiltonian system.
struct GeodesicRhs {
  Vector qdot;
  Vector pdot;
  Vector slot_momentum;  // P = embed(p) - C^T lambda
  Vector lambda;
  double energy = 0.0;   // 1/2 P^T K P
  double epsilon = 0.0;
  double residual = 0.0;
};

GeodesicRhs geodesic_rhs(const ShapeModel& model, const Vector& q, const Vector& p);
/// 1/2 (pi p)^T K (pi p); equals 1/2 p^T K p without constraints.
double reduced_hamiltonian(const ShapeModel& model, const Vector& q, const Vector& p);

/// Time-discretized path on the uniform grid t_i = i / N.
struct Trajectory {
  enum class Kind { Geodesic, Controlled };

  Kind kind = Kind::Geodesic;
  int dim = 0;
  int landmarks = 0;
  int steps = 0;
  int constraint_rows = 0;
  std::vector<Vector> q;       // N + 1 nodes
  std::vector<Vector> m;       // geodesic: momenta at nodes; controlled: one control per step
  std::vector<Vector> lambda;  // geodesic: per node; controlled: per step (AL multipliers)
  std::vector<double> energy;  // per node: H, or 1/2 u^T K u with the step's control (last node: previous step)
  std::vector<double> epsilon;  // regularization used per node (geodesic)

  // Geodesic only: node derivatives and slot momenta, kept for interpolation and grid flows.
  std::vector<Vector> qdot;
  std::vector<Vector> pdot;
  std::vector<Vector> slot_momentum;

  // Controlled only: 1/2 u_i^T K(q_{i+1}) u_i and the step-averaged constraint value.
  std::vector<double> end_energy;
  std::vector<Vector> constraint;

  double dt() const { return 1.0 / steps; }
  double time(int i) const { return static_cast<double>(i) / steps; }
  /// max_i |e_i - e_0| / |e_0| (absolute when e_0 = 0).
  double energy_drift() const;
};

/// Fixed-step RK4 of the Hamiltonian flow from (q0, p0).
Trajectory integrate_geodesic(const ShapeModel& model, const Vector& q0, const Vector& p0, int steps);

/// RK4 of q_dot = K_q u_i with u held constant on each of the N steps.
Trajectory flow_controlled(const ShapeModel& model, const Vector& q0, const std::vector<Vector>& controls);

/// sum_i dt/2 (1/2 u_i^T K(q_i) u_i + 1/2 u_i^T K(q_{i+1}) u_i)
double kinetic_integral(const Trajectory& traj);

/// Adjoint pair of (q, p) at t = 0.
struct BackwardState {
  Vector z;
  Vector alpha;
};

/// Integrates the transposed variational system backward from (zT, 0) at t = 1
/// on the trajectory's grid. alpha is the gradient of a terminal cost with
/// gradient zT with respect to p0.
BackwardState backward_sweep(const ShapeModel& model, const Trajectory& traj, const Vector& zT);

/// Throws BlowUp if v is non-finite or exceeds the blow-up bound.
void check_finite_state(const Vector& v, double bound, int step, const char* what);

}  // namespace lddmm
