#include "lddmm/geodesics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lddmm/error.hpp"

namespace lddmm {
namespace {

double blowup_bound(const Vector& q0) { return 1e8 * (1.0 + max_abs(q0)); }

// Hermite midpoint of a node pair from values and derivatives.
Vector hermite_mid(const Vector& y0, const Vector& y1, const Vector& d0, const Vector& d1, double dt) {
  return 0.5 * (y0 + y1) + dt / 8.0 * (d0 - d1);
}

// d/dq grad_q (p^T K_q p) . dir by central differences with step h.
Vector hessian_action(const ShapeModel& model, const Vector& q, const Vector& p, const Vector& dir, double h) {
  const LabeledKernel plus = model.kernel(q + h * dir);
  const LabeledKernel minus = model.kernel(q - h * dir);
  return (plus.quad_grad(p, p) - minus.quad_grad(p, p)) / (2.0 * h);
}

struct Adjoint {
  Vector z;
  Vector alpha;
};

// d/ds (z, alpha) = DF^T (z, alpha) at (q, p), unconstrained landmark case.
Adjoint adjoint_rhs_free(const ShapeModel& model, const Vector& q, const Vector& p, const Adjoint& y) {
  const LabeledKernel k = model.kernel(q);
  Adjoint out;
  out.z = k.quad_grad(p, y.z);
  const double scale = max_abs(y.alpha);
  if (scale > 0.0) {
    const double h = 1e-4 * model.fields().min_sigma() * (1.0 + max_abs(q)) / scale;
    out.z -= 0.5 * hessian_action(model, q, p, y.alpha, h);
  }
  out.alpha = k.apply(y.z) - k.dir_deriv(p, y.alpha);
  return out;
}

// Same system through central differences of G = (-p_dot, q_dot).
Adjoint adjoint_rhs_fd(const ShapeModel& model, const Vector& q, const Vector& p, const Adjoint& y) {
  const double a = max_abs(y.alpha) / model.fields().min_sigma();
  const double b = max_abs(y.z) / (1.0 + max_abs(p));
  const double scale = std::max(a, b);
  if (scale == 0.0) return {Vector::Zero(q.size()), Vector::Zero(q.size())};
  const double eps = 1e-4 / scale;
  const GeodesicRhs f1 = geodesic_rhs(model, q - eps * y.alpha, p + eps * y.z);
  const GeodesicRhs f2 = geodesic_rhs(model, q + eps * y.alpha, p - eps * y.z);
  return {(f2.pdot - f1.pdot) / (2.0 * eps), (f1.qdot - f2.qdot) / (2.0 * eps)};
}

}  // namespace

void check_finite_state(const Vector& v, double bound, int step, const char* what) {
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (!std::isfinite(v[i]) || std::abs(v[i]) > bound)
      throw BlowUp(std::string(what) + " blew up at step " + std::to_string(step) + " (coordinate " +
                       std::to_string(i) + " = " + std::to_string(v[i]) + ")",
                   step);
}

GeodesicRhs geodesic_rhs(const ShapeModel& model, const Vector& q, const Vector& p) {
  if (p.size() != q.size()) throw InvalidInput("momentum size does not match the state");
  GeodesicRhs out;
  if (!model.constrained()) {
    const LabeledKernel k = model.kernel(q);
    out.qdot = k.apply(p);
    out.pdot = -0.5 * k.quad_grad(p, p);
    out.slot_momentum = p;
    out.lambda = Vector(0);
    out.energy = 0.5 * p.dot(out.qdot);
    return out;
  }
  const ConstraintFrame f = model.frame(q);
  const Vector p0 = f.embed(p);
  const MultiplierSolve s = solve_lambda(f, p0, model.regularization());
  const Vector slot_p = p0 - f.apply_ct(s.lambda);
  const Vector v = f.kernel().apply(slot_p);
  out.qdot = f.restrict(v);
  out.pdot = -0.5 * f.scatter(f.kernel().quad_grad(slot_p, slot_p)) + f.weight_gradient(s.lambda, v);
  out.slot_momentum = slot_p;
  out.lambda = s.lambda;
  out.energy = 0.5 * slot_p.dot(v);
  out.epsilon = s.epsilon;
  out.residual = s.residual;
  return out;
}

double reduced_hamiltonian(const ShapeModel& model, const Vector& q, const Vector& p) {
  return geodesic_rhs(model, q, p).energy;
}

double Trajectory::energy_drift() const {
  if (energy.empty()) return 0.0;
  const double e0 = energy.front();
  double worst = 0.0;
  for (double e : energy) worst = std::max(worst, std::abs(e - e0));
  return e0 != 0.0 ? worst / std::abs(e0) : worst;
}

Trajectory integrate_geodesic(const ShapeModel& model, const Vector& q0, const Vector& p0, int steps) {
  if (steps < 1) throw InvalidInput("the number of time steps must be >= 1");
  if (q0.size() != model.structure().coords().size() || p0.size() != q0.size())
    throw InvalidInput("initial state and momentum must match the model");
  if (!q0.allFinite() || !p0.allFinite()) throw InvalidInput("initial state and momentum must be finite");

  Trajectory t;
  t.kind = Trajectory::Kind::Geodesic;
  t.dim = model.dim();
  t.landmarks = model.size();
  t.steps = steps;
  t.constraint_rows = model.constraint_rows();
  const double bound = blowup_bound(q0);
  const double dt = 1.0 / steps;

  auto record = [&](const Vector& q, const Vector& p, GeodesicRhs r) {
    t.q.push_back(q);
    t.m.push_back(p);
    t.lambda.push_back(std::move(r.lambda));
    t.energy.push_back(r.energy);
    t.epsilon.push_back(r.epsilon);
    t.qdot.push_back(std::move(r.qdot));
    t.pdot.push_back(std::move(r.pdot));
    t.slot_momentum.push_back(std::move(r.slot_momentum));
  };

  Vector q = q0;
  Vector p = p0;
  GeodesicRhs k1 = geodesic_rhs(model, q, p);
  for (int i = 0; i < steps; ++i) {
    const Vector q1 = q + 0.5 * dt * k1.qdot;
    const Vector p1 = p + 0.5 * dt * k1.pdot;
    check_finite_state(q1, bound, i, "state");
    check_finite_state(p1, bound, i, "momentum");
    const GeodesicRhs k2 = geodesic_rhs(model, q1, p1);
    const Vector q2 = q + 0.5 * dt * k2.qdot;
    const Vector p2 = p + 0.5 * dt * k2.pdot;
    check_finite_state(q2, bound, i, "state");
    check_finite_state(p2, bound, i, "momentum");
    const GeodesicRhs k3 = geodesic_rhs(model, q2, p2);
    const Vector q3 = q + dt * k3.qdot;
    const Vector p3 = p + dt * k3.pdot;
    check_finite_state(q3, bound, i, "state");
    check_finite_state(p3, bound, i, "momentum");
    const GeodesicRhs k4 = geodesic_rhs(model, q3, p3);
    Vector qn = q + dt / 6.0 * (k1.qdot + 2.0 * k2.qdot + 2.0 * k3.qdot + k4.qdot);
    Vector pn = p + dt / 6.0 * (k1.pdot + 2.0 * k2.pdot + 2.0 * k3.pdot + k4.pdot);
    check_finite_state(qn, bound, i, "state");
    check_finite_state(pn, bound, i, "momentum");
    record(q, p, std::move(k1));
    q = std::move(qn);
    p = std::move(pn);
    k1 = geodesic_rhs(model, q, p);
  }
  record(q, p, std::move(k1));
  return t;
}

Trajectory flow_controlled(const ShapeModel& model, const Vector& q0, const std::vector<Vector>& controls) {
  const int steps = static_cast<int>(controls.size());
  if (steps < 1) throw InvalidInput("the number of time steps must be >= 1");
  if (q0.size() != model.structure().coords().size()) throw InvalidInput("initial state must match the model");
  for (const auto& u : controls)
    if (u.size() != q0.size() || !u.allFinite()) throw InvalidInput("controls must be finite and match the state");

  Trajectory t;
  t.kind = Trajectory::Kind::Controlled;
  t.dim = model.dim();
  t.landmarks = model.size();
  t.steps = steps;
  t.constraint_rows = model.constraint_rows();
  t.m = controls;
  const double bound = blowup_bound(q0);
  const double dt = 1.0 / steps;

  // Energy and constraint value of control u at state q.
  auto evaluate = [&](const Vector& q, const Vector& u, double& energy) -> Vector {
    const ConstraintFrame f = model.frame(q);
    const Vector v = f.kernel().apply(f.embed(u));
    energy = 0.5 * u.dot(f.restrict(v));
    return f.apply_c(v);
  };

  Vector q = q0;
  t.q.push_back(q);
  for (int i = 0; i < steps; ++i) {
    const Vector& u = controls[i];
    const Vector k1 = model.kernel(q).apply(u);
    const Vector q1 = q + 0.5 * dt * k1;
    check_finite_state(q1, bound, i, "state");
    const Vector k2 = model.kernel(q1).apply(u);
    const Vector q2 = q + 0.5 * dt * k2;
    check_finite_state(q2, bound, i, "state");
    const Vector k3 = model.kernel(q2).apply(u);
    const Vector q3 = q + dt * k3;
    check_finite_state(q3, bound, i, "state");
    const Vector k4 = model.kernel(q3).apply(u);
    Vector qn = q + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite_state(qn, bound, i, "state");

    double e0 = 0.0, e1 = 0.0;
    const Vector c0 = evaluate(q, u, e0);
    const Vector c1 = evaluate(qn, u, e1);
    t.energy.push_back(e0);
    t.end_energy.push_back(e1);
    t.constraint.push_back(0.5 * (c0 + c1));
    q = std::move(qn);
    t.q.push_back(q);
  }
  t.energy.push_back(t.end_energy.back());
  return t;
}

double kinetic_integral(const Trajectory& traj) {
  if (traj.kind != Trajectory::Kind::Controlled)
    throw InvalidInput("kinetic_integral needs a controlled trajectory");
  double sum = 0.0;
  for (int i = 0; i < traj.steps; ++i) sum += 0.5 * traj.dt() * (traj.energy[i] + traj.end_energy[i]);
  return sum;
}

BackwardState backward_sweep(const ShapeModel& model, const Trajectory& traj, const Vector& zT) {
  if (traj.kind != Trajectory::Kind::Geodesic || traj.qdot.size() != traj.q.size())
    throw InvalidInput("backward_sweep needs a geodesic trajectory with node derivatives");
  if (zT.size() != traj.q.front().size()) throw InvalidInput("terminal adjoint has the wrong size");

  const bool analytic = !model.constrained() && model.layout().count() == model.size();
  auto rhs = [&](const Vector& q, const Vector& p, const Adjoint& y) {
    return analytic ? adjoint_rhs_free(model, q, p, y) : adjoint_rhs_fd(model, q, p, y);
  };
  const double dt = traj.dt();
  const double bound = 1e8 * (1.0 + max_abs(zT)) * (1.0 + max_abs(traj.q.front()));

  Adjoint y{zT, Vector::Zero(zT.size())};
  for (int i = traj.steps - 1; i >= 0; --i) {
    // Reversed time runs from node i+1 to node i.
    const Vector& qa = traj.q[i + 1];
    const Vector& pa = traj.m[i + 1];
    const Vector& qb = traj.q[i];
    const Vector& pb = traj.m[i];
    const Vector qm = hermite_mid(qb, qa, traj.qdot[i], traj.qdot[i + 1], dt);
    const Vector pm = hermite_mid(pb, pa, traj.pdot[i], traj.pdot[i + 1], dt);

    const Adjoint k1 = rhs(qa, pa, y);
    const Adjoint k2 = rhs(qm, pm, {y.z + 0.5 * dt * k1.z, y.alpha + 0.5 * dt * k1.alpha});
    const Adjoint k3 = rhs(qm, pm, {y.z + 0.5 * dt * k2.z, y.alpha + 0.5 * dt * k2.alpha});
    const Adjoint k4 = rhs(qb, pb, {y.z + dt * k3.z, y.alpha + dt * k3.alpha});
    y.z += dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z);
    y.alpha += dt / 6.0 * (k1.alpha + 2.0 * k2.alpha + 2.0 * k3.alpha + k4.alpha);
    check_finite_state(y.z, bound, i, "adjoint");
    check_finite_state(y.alpha, bound, i, "adjoint");
  }
  return {y.z, y.alpha};
}

}  // namespace lddmm
