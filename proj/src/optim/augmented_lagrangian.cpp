#include <algorithm>
#include <cmath>
#include <limits>

#include "lddmm/error.hpp"
#include "lddmm/optim.hpp"
#include "precondition.hpp"

namespace lddmm {
namespace {

Vector flatten(const Controls& u) {
  if (u.empty()) return Vector(0);
  const Eigen::Index m = u.front().size();
  Vector x(static_cast<Eigen::Index>(u.size()) * m);
  for (std::size_t i = 0; i < u.size(); ++i) x.segment(static_cast<Eigen::Index>(i) * m, m) = u[i];
  return x;
}

Controls unflatten(const Vector& x, int steps) {
  const Eigen::Index m = x.size() / steps;
  Controls u(steps);
  for (int i = 0; i < steps; ++i) u[i] = x.segment(i * m, m);
  return u;
}

void check_controls(const MatchProblem& problem, const Controls& u, const Controls& lambda) {
  const Eigen::Index nd = problem.q0.coords().size();
  const int k = problem.model.constraint_rows();
  if (u.empty()) throw InvalidInput("at least one control step is required");
  if (lambda.size() != u.size()) throw InvalidInput("one multiplier vector per control step is required");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].size() != nd || !u[i].allFinite()) throw InvalidInput("controls must be finite and match q0");
    if (lambda[i].size() != k || !lambda[i].allFinite())
      throw InvalidInput("multipliers must be finite with one entry per constraint row");
  }
}

}  // namespace

double max_step_violation(const Trajectory& traj) {
  double worst = 0.0;
  for (const auto& c : traj.constraint) worst = std::max(worst, c.size() ? c.norm() : 0.0);
  return worst;
}

AlEval al_gradient(const MatchProblem& problem, const Controls& u, const Controls& lambda, double mu,
                   bool with_gradient) {
  check_controls(problem, u, lambda);
  if (!(mu > 0.0)) throw InvalidInput("penalty parameter mu must be positive");
  const ShapeModel& model = problem.model;
  const int steps = static_cast<int>(u.size());
  const double dt = 1.0 / steps;
  const bool constrained = model.constrained();

  AlEval e;
  e.traj = flow_controlled(model, problem.q0.coords(), u);
  e.traj.lambda = lambda;
  e.kinetic = kinetic_integral(e.traj);
  for (int i = 0; i < steps; ++i) {
    const Vector& c = e.traj.constraint[i];
    if (c.size()) e.penalty += dt * (-lambda[i].dot(c) + c.squaredNorm() / (2.0 * mu));
  }
  const AttachmentValue att = problem.attach(e.traj.q.back());
  e.attachment = att.value;
  e.value = e.kinetic + e.penalty + e.attachment;
  if (!with_gradient) return e;

  const Eigen::Index nd = problem.q0.coords().size();
  std::vector<Vector> gq(steps + 1, Vector::Zero(nd));
  Controls gu(steps, Vector::Zero(nd));

  // Running costs: kinetic trapezoid and penalty on the averaged constraint.
  for (int i = 0; i < steps; ++i) {
    Vector rho_half;
    if (constrained) rho_half = 0.5 * dt * (-lambda[i] + e.traj.constraint[i] / mu);
    for (int j : {i, i + 1}) {
      const ConstraintFrame f = model.frame(e.traj.q[j]);
      const Vector p0 = f.embed(u[i]);
      const Vector v = f.kernel().apply(p0);
      gq[j] += 0.25 * dt * f.scatter(f.kernel().quad_grad(p0, p0));
      gu[i] += 0.5 * dt * f.restrict(v);
      if (constrained) {
        const Vector ctr = f.apply_ct(rho_half);
        gq[j] += f.scatter(f.kernel().quad_grad(ctr, p0)) + f.weight_gradient(rho_half, v);
        gu[i] += f.restrict(f.kernel().apply(ctr));
      }
    }
  }

  // Reverse pass through the RK4 stages.
  Vector abar = att.gradient + gq[steps];
  e.grad.assign(steps, Vector());
  for (int i = steps - 1; i >= 0; --i) {
    const Vector& q = e.traj.q[i];
    const Vector& ui = u[i];
    const LabeledKernel k0 = model.kernel(q);
    const Vector k1 = k0.apply(ui);
    const LabeledKernel ka = model.kernel(q + 0.5 * dt * k1);
    const Vector k2 = ka.apply(ui);
    const LabeledKernel kb = model.kernel(q + 0.5 * dt * k2);
    const Vector k3 = kb.apply(ui);
    const LabeledKernel kc = model.kernel(q + dt * k3);

    Vector kb1 = dt / 6.0 * abar;
    Vector kb2 = dt / 3.0 * abar;
    Vector kb3 = dt / 3.0 * abar;
    const Vector kb4 = dt / 6.0 * abar;
    Vector qbar = abar;
    Vector ubar = gu[i];

    const Vector q3bar = kc.quad_grad(kb4, ui);
    ubar += kc.apply(kb4);
    qbar += q3bar;
    kb3 += dt * q3bar;

    const Vector q2bar = kb.quad_grad(kb3, ui);
    ubar += kb.apply(kb3);
    qbar += q2bar;
    kb2 += 0.5 * dt * q2bar;

    const Vector q1bar = ka.quad_grad(kb2, ui);
    ubar += ka.apply(kb2);
    qbar += q1bar;
    kb1 += 0.5 * dt * q1bar;

    qbar += k0.quad_grad(kb1, ui);
    ubar += k0.apply(kb1);

    e.grad[i] = std::move(ubar);
    abar = qbar + gq[i];
  }
  return e;
}

AlResult minimize_augmented_lagrangian(const MatchProblem& problem, const SolverOptions& opts) {
  opts.validate();
  const ShapeModel& model = problem.model;
  const int steps = opts.steps;
  const int k = model.constraint_rows();
  const Eigen::Index nd = problem.q0.coords().size();
  const double dt = 1.0 / steps;

  AlResult out;
  out.u.assign(steps, Vector::Zero(nd));
  out.lambda.assign(steps, Vector::Zero(k));
  double mu = opts.al.mu0;
  double previous = std::numeric_limits<double>::infinity();
  SolveReport& r = out.report;
  r.solver = "augmented_lagrangian";
  r.termination = Termination::MaxIterations;

  std::vector<Vector> nodes;  // states of the last gradient evaluation, for the preconditioner
  Termination inner = Termination::MaxIterations;
  double violation = 0.0;
  for (int outer = 0; outer < opts.max_outer_iters; ++outer) {
    DescentFunctions fns;
    fns.value = [&](const Vector& x) {
      return al_gradient(problem, unflatten(x, steps), out.lambda, mu, false).value;
    };
    fns.value_grad = [&](const Vector& x, Vector& g) {
      AlEval e = al_gradient(problem, unflatten(x, steps), out.lambda, mu, true);
      g = flatten(e.grad);
      nodes = std::move(e.traj.q);
      return e.value;
    };
    fns.direction = [&](const Vector&, const Vector& g) -> Vector {
      Vector d(g.size());
      for (int i = 0; i < steps; ++i)
        d.segment(i * nd, nd) =
            -detail::kernel_solve(model.kernel(nodes[i]), g.segment(i * nd, nd), opts.preconditioner_shift) / dt;
      return d;
    };
    const DescentResult dres =
        armijo_descent(fns, flatten(out.u), opts.max_inner_iters, opts.grad_tol, opts.armijo);
    out.u = unflatten(dres.x, steps);
    inner = dres.termination;
    r.iterations += dres.iterations;
    r.outer_iterations = outer + 1;
    r.objectives.insert(r.objectives.end(), dres.values.begin(), dres.values.end());
    r.grad_norms.insert(r.grad_norms.end(), dres.grad_norms.begin(), dres.grad_norms.end());

    const AlEval e = al_gradient(problem, out.u, out.lambda, mu, false);
    violation = max_step_violation(e.traj);
    double lambda_norm = 0.0;
    for (const auto& l : out.lambda) lambda_norm = std::max(lambda_norm, l.size() ? l.norm() : 0.0);
    r.mu_history.push_back(mu);
    r.lambda_norms.push_back(lambda_norm);
    r.violations.push_back(violation);

    if (k == 0) {
      r.termination = inner;
      break;
    }
    if (violation <= opts.al.constraint_tol && inner == Termination::Converged) {
      r.termination = Termination::Converged;
      break;
    }
    for (int i = 0; i < steps; ++i) out.lambda[i] -= e.traj.constraint[i] / mu;
    if (violation > previous / 10.0) mu = std::max(opts.al.mu_min, opts.al.mu_shrink * mu);
    previous = violation;
  }
  if (r.termination == Termination::MaxIterations && violation <= opts.al.constraint_tol &&
      inner == Termination::Stalled)
    r.termination = Termination::Stalled;

  AlEval final_eval = al_gradient(problem, out.u, out.lambda, mu, false);
  r.kinetic = final_eval.kinetic;
  r.attachment = final_eval.attachment;
  r.objective = final_eval.kinetic + final_eval.attachment;
  r.max_violation = max_step_violation(final_eval.traj);
  out.traj = std::move(final_eval.traj);
  return out;
}

}  // namespace lddmm
