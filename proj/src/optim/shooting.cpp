#include <cmath>

#include "lddmm/error.hpp"
#include "lddmm/optim.hpp"
#include "precondition.hpp"

namespace lddmm {
namespace {

ShootingEval forward(const MatchProblem& problem, const Vector& p0, const SolverOptions& opts) {
  if (p0.size() != problem.q0.coords().size()) throw InvalidInput("p0 does not match q0");
  ShootingEval e;
  e.traj = integrate_geodesic(problem.model, problem.q0.coords(), p0, opts.steps);
  e.kinetic = e.traj.energy.front();
  e.attachment = problem.attach(e.traj.q.back()).value;
  e.objective = e.kinetic + e.attachment;
  return e;
}

double max_node_violation(const ShapeModel& model, const Trajectory& traj) {
  if (!model.constrained()) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.q.size(); ++i) {
    const ConstraintFrame f = model.frame(traj.q[i]);
    worst = std::max(worst, f.apply_c(f.kernel().apply(traj.slot_momentum[i])).norm());
  }
  return worst;
}

}  // namespace

ShootingEval shooting_objective(const MatchProblem& problem, const Vector& p0, const SolverOptions& opts) {
  return forward(problem, p0, opts);
}

ShootingEval shooting_objective_grad(const MatchProblem& problem, const Vector& p0, const SolverOptions& opts) {
  ShootingEval e = forward(problem, p0, opts);
  const Vector zT = problem.attach(e.traj.q.back()).gradient;
  const BackwardState b = backward_sweep(problem.model, e.traj, zT);
  e.grad = e.traj.qdot.front() + b.alpha;
  return e;
}

ShootingResult minimize_shooting(const MatchProblem& problem, const Vector& p0_init, const SolverOptions& opts) {
  opts.validate();
  if (p0_init.size() != problem.q0.coords().size() || !p0_init.allFinite())
    throw InvalidInput("p0_init must be finite and match q0");

  const LabeledKernel k0 = problem.model.kernel(problem.q0.coords());
  DescentFunctions fns;
  fns.value = [&](const Vector& p) { return shooting_objective(problem, p, opts).objective; };
  fns.value_grad = [&](const Vector& p, Vector& g) {
    ShootingEval e = shooting_objective_grad(problem, p, opts);
    g = std::move(e.grad);
    return e.objective;
  };
  fns.direction = [&](const Vector&, const Vector& g) -> Vector {
    return -detail::kernel_solve(k0, g, opts.preconditioner_shift);
  };
  const DescentResult d = armijo_descent(fns, p0_init, opts.max_inner_iters, opts.grad_tol, opts.armijo);

  ShootingResult out;
  out.p0 = d.x;
  ShootingEval final_eval = shooting_objective(problem, out.p0, opts);
  out.traj = std::move(final_eval.traj);
  SolveReport& r = out.report;
  r.solver = "shooting";
  r.objective = final_eval.objective;
  r.kinetic = final_eval.kinetic;
  r.attachment = final_eval.attachment;
  r.max_violation = max_node_violation(problem.model, out.traj);
  r.iterations = d.iterations;
  r.outer_iterations = 1;
  r.objectives = d.values;
  r.grad_norms = d.grad_norms;
  r.termination = d.termination;
  return out;
}

}  // namespace lddmm
