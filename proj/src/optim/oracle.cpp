#include <algorithm>
#include <cmath>

#include "lddmm/error.hpp"
#include "lddmm/optim.hpp"

namespace lddmm {

OracleResult brute_force_oracle(const MatchProblem& problem, int steps, int grid_resolution) {
  const int n = problem.q0.size();
  const int d = problem.q0.dim();
  if (n * d > 4 || steps > 5)
    throw InvalidInput("brute-force oracle is limited to n*d <= 4 and N <= 5 (got n*d = " +
                       std::to_string(n * d) + ", N = " + std::to_string(steps) + ")");
  if (steps < 1 || grid_resolution < 1) throw InvalidInput("oracle needs N >= 1 and grid_resolution >= 1");

  const Eigen::Index nd = problem.q0.coords().size();
  const double dt = 1.0 / steps;
  OracleResult out;
  auto split = [&](const Vector& x) {
    Controls u(steps);
    for (int i = 0; i < steps; ++i) u[i] = x.segment(i * nd, nd);
    return u;
  };
  auto objective = [&](const Vector& x, double rho) {
    ++out.evaluations;
    const Trajectory t = flow_controlled(problem.model, problem.q0.coords(), split(x));
    double penalty = 0.0;
    for (const auto& c : t.constraint) penalty += dt * c.squaredNorm();
    return kinetic_integral(t) + problem.attach(t.q.back()).value + rho * penalty;
  };

  const double scale =
      std::max({1.0, max_abs(problem.target.coords() - problem.q0.coords()), diameter(problem.q0)});
  Vector x = Vector::Zero(nd * steps);
  const bool constrained = problem.model.constrained();
  std::vector<double> penalties = {0.0};
  if (constrained) {
    penalties.clear();
    for (double rho = 1e2; rho <= 1e10 * 1.5; rho *= 10.0) penalties.push_back(rho);
  }
  constexpr long kMaxEvaluations = 20'000'000;
  for (double rho : penalties) {
    double f = objective(x, rho);
    for (double mesh = scale / grid_resolution; mesh > 1e-9;) {
      bool improved = false;
      for (Eigen::Index j = 0; j < x.size(); ++j) {
        for (double sign : {1.0, -1.0}) {
          Vector y = x;
          y[j] += sign * mesh;
          const double fy = objective(y, rho);
          if (fy < f) {
            x = std::move(y);
            f = fy;
            improved = true;
            break;
          }
        }
      }
      if (!improved) mesh *= 0.5;
      if (out.evaluations > kMaxEvaluations) break;
    }
  }

  out.u = split(x);
  const Trajectory t = flow_controlled(problem.model, problem.q0.coords(), out.u);
  out.objective = kinetic_integral(t) + problem.attach(t.q.back()).value;
  out.max_violation = max_step_violation(t);
  return out;
}

}  // namespace lddmm
