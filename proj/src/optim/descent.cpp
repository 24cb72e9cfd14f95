#include <cmath>
#include <limits>

#include "lddmm/error.hpp"
#include "lddmm/optim.hpp"

namespace lddmm {

void SolverOptions::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInput(std::string(name) + " must be positive");
  };
  auto fraction = [](double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) throw InvalidInput(std::string(name) + " must lie in (0, 1)");
  };
  if (steps < 1) throw InvalidInput("steps must be >= 1");
  if (max_outer_iters < 1) throw InvalidInput("max_outer_iters must be >= 1");
  if (max_inner_iters < 1) throw InvalidInput("max_inner_iters must be >= 1");
  if (armijo.max_backtracks < 1) throw InvalidInput("armijo.max_backtracks must be >= 1");
  positive(grad_tol, "grad_tol");
  positive(preconditioner_shift, "preconditioner_shift");
  fraction(armijo.c1, "armijo.c1");
  fraction(armijo.shrink, "armijo.shrink");
  positive(armijo.initial_step, "armijo.initial_step");
  positive(al.mu0, "al.mu0");
  fraction(al.mu_shrink, "al.mu_shrink");
  positive(al.mu_min, "al.mu_min");
  positive(al.constraint_tol, "al.constraint_tol");
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::Stalled: return "stalled";
    case Termination::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

MatchProblem::MatchProblem(ShapeModel m, LandmarkState start, LandmarkState goal, double c)
    : model(std::move(m)), q0(std::move(start)), target(std::move(goal)), attachment_weight(c) {
  if (!q0.same_structure(target)) throw InvalidInput("q0 and target must share dimension, size and groups");
  if (!q0.same_structure(model.structure())) throw InvalidInput("q0 does not match the model structure");
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidInput("attachment weight must be positive");
}

AttachmentValue MatchProblem::attach(const Vector& q) const {
  return grouped_attachment(target.with_coords(q), target, attachment_weight);
}

DescentResult armijo_descent(const DescentFunctions& fns, Vector x0, int max_iters, double grad_tol,
                             const ArmijoOptions& armijo) {
  DescentResult r;
  r.x = std::move(x0);
  r.value = fns.value_grad(r.x, r.grad);
  const double g0 = r.grad.norm();
  r.values.push_back(r.value);
  r.grad_norms.push_back(g0);

  // Trial values that fail to evaluate (blow-up, singular constraints) count as rejections.
  auto safe_value = [&](const Vector& x) {
    try {
      const double v = fns.value(x);
      return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  double step = armijo.initial_step;
  r.termination = Termination::MaxIterations;
  for (int it = 0; it < max_iters; ++it) {
    if (r.grad.norm() <= grad_tol * (1.0 + g0)) {
      r.termination = Termination::Converged;
      break;
    }
    Vector d = fns.direction ? fns.direction(r.x, r.grad) : Vector(-r.grad);
    double slope = r.grad.dot(d);
    if (!(slope < 0.0) || !d.allFinite()) {
      d = -r.grad;
      slope = -r.grad.squaredNorm();
    }
    double t = step;
    bool accepted = false;
    Vector trial;
    for (int b = 0; b < armijo.max_backtracks; ++b) {
      trial = r.x + t * d;
      const double v = safe_value(trial);
      if (v <= r.value + armijo.c1 * t * slope && v < r.value) {
        accepted = true;
        break;
      }
      t *= armijo.shrink;
    }
    if (!accepted) {
      r.termination = Termination::Stalled;
      break;
    }
    r.x = std::move(trial);
    r.value = fns.value_grad(r.x, r.grad);
    r.values.push_back(r.value);
    r.grad_norms.push_back(r.grad.norm());
    ++r.iterations;
    // Start the next search a little beyond the last accepted step.
    step = std::min(2.0 * t, 1e3 * armijo.initial_step);
  }
  if (r.termination == Termination::MaxIterations && r.grad.norm() <= grad_tol * (1.0 + g0))
    r.termination = Termination::Converged;
  return r;
}

}  // namespace lddmm
