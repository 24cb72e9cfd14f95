// Property-level acceptance run. One PASS/FAIL line per criterion; the exit
// status is nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "lddmm/experiments.hpp"
#include "lddmm/geodesics.hpp"
#include "lddmm/optim.hpp"
#include "lddmm/shapes.hpp"
#include "../support/oracles.hpp"

using namespace lddmm;

namespace {

// Tolerances and budgets.
constexpr double kEnergyDrift = 1e-6;
constexpr double kEnergyRatioLo = 10.0, kEnergyRatioHi = 25.0;
constexpr double kGradFree = 1e-4, kGradConstrained = 1e-3;
constexpr double kIdempotence = 1e-10, kFeasibility = 1e-8;
constexpr double kShrink = 0.99, kVolumeDrift = 1e-3, kAttachmentFraction = 0.05;
constexpr double kStitched = 1e-6, kSlidingResidual = 1e-3, kSlip = 1e-3;
constexpr double kOracle = 1e-2;
constexpr double kCrossSolver = 1e-3;

struct Verdict {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) ok = false;
    if (!detail.empty()) detail += "; ";
    detail += what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<void(Verdict&)>& body) {
  Verdict v;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(v);
  } catch (const std::exception& e) {
    v.require(false, std::string("threw: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  v.require(secs < budget_s, "time " + fmt(secs) + " s (< " + fmt(budget_s) + ")");
  if (!v.ok) ++failures;
  std::printf("%s %d %s: %s\n", v.ok ? "PASS" : "FAIL", id, title, v.detail.c_str());
  std::fflush(stdout);
}

double relative_drift(const Trajectory& t) {
  double worst = 0.0;
  for (double e : t.energy) worst = std::max(worst, std::abs(e - t.energy.front()));
  return worst / std::abs(t.energy.front());
}

LandmarkState ten_landmarks(oracle::Rng& rng) {
  return LandmarkState(2, circle_shape(10, {0, 0}, 1).coords() + rng.normal_vector(20, 0.05));
}

void energy(Verdict& v) {
  oracle::Rng rng(101);
  const LandmarkState s = ten_landmarks(rng);
  const Vector p0 = rng.normal_vector(20, 0.8);
  const KernelSpec k{KernelFamily::Gaussian, 0.5};
  const ShapeModel free = ShapeModel::single(k, s);
  const ShapeModel vol = ShapeModel::single(k, s, ConstraintSet({volume_constraint("shape")}));
  for (const auto* m : {&free, &vol}) {
    const double d100 = relative_drift(integrate_geodesic(*m, s.coords(), p0, 100));
    const double d200 = relative_drift(integrate_geodesic(*m, s.coords(), p0, 200));
    const std::string tag = m == &free ? "free" : "volume";
    v.require(d100 < kEnergyDrift, tag + " drift " + fmt(d100));
    v.require(d100 / d200 > kEnergyRatioLo && d100 / d200 < kEnergyRatioHi, tag + " ratio " + fmt(d100 / d200));
  }
}

void gradients(Verdict& v) {
  oracle::Rng rng(202);
  double worst_free = 0.0, worst_cons = 0.0;
  for (int trial = 0; trial < 4; ++trial) {
    const Vector q0 = circle_shape(5, {0, 0}, 1).coords() + rng.normal_vector(10, 0.1);
    const Vector target = q0 + rng.normal_vector(10, 0.3);
    const LandmarkState s(2, q0);
    const KernelSpec k{KernelFamily::Gaussian, 1.0};
    for (int cons = 0; cons < 2; ++cons) {
      const ShapeModel m =
          cons ? ShapeModel::single(k, s, ConstraintSet({volume_constraint("shape")})) : ShapeModel::single(k, s);
      const MatchProblem pr(m, s, s.with_coords(target), 2.0);
      SolverOptions o;
      o.steps = 40;
      double& worst = cons ? worst_cons : worst_free;

      const Vector p0 = rng.normal_vector(10, 0.5);
      const Vector g = shooting_objective_grad(pr, p0, o).grad;
      const Vector fd =
          oracle::fd_gradient([&](const Vector& p) { return shooting_objective(pr, p, o).objective; }, p0, 1e-5);
      worst = std::max(worst, oracle::rel_err(g, fd));

      const int steps = 8;
      Controls u, lambda;
      for (int i = 0; i < steps; ++i) {
        u.push_back(rng.normal_vector(10, 0.5));
        lambda.push_back(rng.normal_vector(m.constraint_rows()));
      }
      const AlEval e = al_gradient(pr, u, lambda, 0.5);
      Vector ga(steps * 10), gf(steps * 10);
      for (int i = 0; i < steps; ++i) {
        ga.segment(i * 10, 10) = e.grad[i];
        gf.segment(i * 10, 10) = oracle::fd_gradient(
            [&](const Vector& x) {
              Controls w = u;
              w[i] = x;
              return al_gradient(pr, w, lambda, 0.5, false).value;
            },
            u[i], 1e-5);
      }
      worst = std::max(worst, oracle::rel_err(ga, gf));
    }
  }
  v.require(worst_free < kGradFree, "free " + fmt(worst_free));
  v.require(worst_cons < kGradConstrained, "constrained " + fmt(worst_cons));
}

void projection(Verdict& v) {
  oracle::Rng rng(303);
  const char* names[] = {"volume", "stitched", "sliding", "linear"};
  for (int kind = 0; kind < 4; ++kind) {
    double idem = 0.0, feas = 0.0;
    bool energy_down = true;
    for (int trial = 0; trial < 100; ++trial) {
      LandmarkState q;
      FieldMap fields;
      ConstraintSet cs;
      if (kind == 0 || kind == 3) {
        q = LandmarkState(2, circle_shape(8, {0, 0}, 1).coords() + rng.normal_vector(16, 0.1));
        fields = FieldMap::single({KernelFamily::Gaussian, 1.0}, q);
        if (kind == 0) cs.add(volume_constraint("shape"));
        else cs.add(linear_kinetic_constraint(rng.normal_vector(32).reshaped(2, 16)));
      } else {
        const LandmarkState s = circle_shape(6, {0, 0}, 1.0, "s");
        const LandmarkState b(2, s.coords() + rng.normal_vector(12, kind == 2 ? 0.05 : 0.0), {{"b", s.group("s").indices}});
        q = concatenate({s, b});
        q = q.with_coords(q.coords() + rng.normal_vector(24, 0.02));
        fields = FieldMap({{"shape", {KernelFamily::Gaussian, 1.0}, {"s"}}, {"background", {KernelFamily::Cubic, 0.3}, {"b"}}}, q);
        if (kind == 1) {
          std::vector<std::pair<int, int>> pairs;
          for (int i = 0; i < 6; ++i) pairs.emplace_back(i, 6 + i);
          cs.add(stitched_constraint(pairs));
        } else {
          cs.add(sliding_constraint("shape", closed_segments(q, "b")));
        }
      }
      const ShapeModel m(q, fields, cs);
      const ConstraintFrame fr = m.frame(q.coords());
      const Vector p = fr.embed(rng.normal_vector(q.coords().size()));
      const Vector pi = project_momentum(fr, p);
      idem = std::max(idem, (project_momentum(fr, pi) - pi).norm() / p.norm());
      const double ckp = fr.apply_c(fr.kernel().apply(p)).norm();
      feas = std::max(feas, fr.apply_c(fr.kernel().apply(pi)).norm() / (1.0 + ckp));
      energy_down = energy_down && pi.dot(fr.kernel().apply(pi)) <= p.dot(fr.kernel().apply(p));
    }
    const std::string n = names[kind];
    v.require(idem < kIdempotence, n + " idempotence " + fmt(idem));
    v.require(feas <= kFeasibility, n + " feasibility " + fmt(feas));
    v.require(energy_down, n + " energy " + (energy_down ? "reduced" : "increased"));
  }
}

double metric(const SolveReport& r, const std::string& key) {
  for (const auto& [k, val] : r.metrics)
    if (k == key) return val;
  throw std::runtime_error("missing metric " + key);
}

void volume(Verdict& v) {
  ExperimentConfig cons = builtin_example("volume-circle");
  ExperimentConfig free = cons;
  free.constraints.clear();
  const MatchProblem pr = build_problem(cons);
  const double initial = pr.attach(pr.q0.coords()).value;

  const RunResult f = run_experiment(free);
  const double shrink = metric(f.report, "volume_min_ratio.shape");
  v.require(shrink < kShrink, "free min volume ratio " + fmt(shrink));

  const RunResult c = run_experiment(cons);
  const double drift = metric(c.report, "volume_drift.shape");
  const double frac = c.report.attachment / initial;
  v.require(drift < kVolumeDrift, "constrained drift " + fmt(drift));
  v.require(frac < kAttachmentFraction, "attachment fraction " + fmt(frac));
}

void multishape(Verdict& v) {
  const RunResult st = run_experiment(builtin_example("multishape-stitched"));
  const double mismatch = metric(st.report, "stitched_mismatch_rel");
  v.require(mismatch < kStitched, "stitched mismatch/diam " + fmt(mismatch));

  const RunResult sl = run_experiment(builtin_example("multishape-sliding"));
  const double residual = metric(sl.report, "constraint_residual");
  const double slip = metric(sl.report, "tangential_slip_rel");
  v.require(residual < kSlidingResidual, "sliding residual " + fmt(residual));
  v.require(slip > kSlip, "tangential slip/diam " + fmt(slip));
}

double spread(std::initializer_list<double> xs) {
  const auto [lo, hi] = std::minmax(xs);
  double small = std::abs(*xs.begin());
  for (double x : xs) small = std::min(small, std::abs(x));
  return (hi - lo) / small;
}

void oracle_check(Verdict& v) {
  SolverOptions o;
  o.steps = 4;
  o.max_inner_iters = 200;
  o.grad_tol = 1e-8;
  {
    const LandmarkState s(1, Vector::Zero(1));
    const MatchProblem pr(ShapeModel::single({KernelFamily::Gaussian, 1.0}, s), s, s.with_coords(Vector::Constant(1, 1.5)), 2.0);
    const double sh = minimize_shooting(pr, Vector::Zero(1), o).report.objective;
    const double al = minimize_augmented_lagrangian(pr, o).report.objective;
    const double orc = brute_force_oracle(pr, o.steps, 20).objective;
    v.require(spread({sh, al, orc}) < kOracle, "1D spread " + fmt(spread({sh, al, orc})));
  }
  {
    const LandmarkState s(2, Vector::Zero(2));
    Matrix row(1, 2);
    row << 1.0, 0.0;
    const ShapeModel m = ShapeModel::single({KernelFamily::Gaussian, 1.0}, s, ConstraintSet({linear_kinetic_constraint(row)}));
    const MatchProblem pr(m, s, s.with_coords(Eigen::Vector2d(1.0, 0.8)), 1.0);
    const double sh = minimize_shooting(pr, Vector::Zero(2), o).report.objective;
    const double al = minimize_augmented_lagrangian(pr, o).report.objective;
    const double orc = brute_force_oracle(pr, o.steps, 20).objective;
    v.require(spread({sh, al, orc}) < kOracle, "2D constrained spread " + fmt(spread({sh, al, orc})));
  }
}

void cross_solver(Verdict& v) {
  oracle::Rng rng(707);
  const Vector q0 = circle_shape(5, {0, 0}, 1).coords() + rng.normal_vector(10, 0.1);
  const LandmarkState s(2, q0);
  const MatchProblem pr(ShapeModel::single({KernelFamily::Gaussian, 1.0}, s), s,
                        s.with_coords(q0 + rng.normal_vector(10, 0.3)), 2.0);
  SolverOptions o;
  o.steps = 40;
  o.max_inner_iters = 500;
  o.grad_tol = 1e-8;
  const double sh = minimize_shooting(pr, Vector::Zero(10), o).report.objective;
  const double al = minimize_augmented_lagrangian(pr, o).report.objective;
  const double rel = std::abs(sh - al) / std::abs(sh);
  v.require(rel < kCrossSolver, "relative gap " + fmt(rel));
}

}  // namespace

int main() {
#if defined(__GLIBC__)
  // Same allocator tuning as the command-line driver.
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 128 << 20);
#endif
  criterion(1, "energy conservation", 5.0, energy);
  criterion(2, "gradient correctness", 30.0, gradients);
  criterion(3, "projection algebra", 5.0, projection);
  criterion(4, "constant-volume matching", 60.0, volume);
  criterion(5, "multishape stitched vs sliding", 60.0, multishape);
  criterion(6, "oracle equivalence", 60.0, oracle_check);
  criterion(7, "cross-solver consistency", 60.0, cross_solver);
  return failures == 0 ? 0 : 1;
}
