#include "lddmm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "lddmm/error.hpp"
#include "lddmm/grid.hpp"
#include "lddmm/shapes.hpp"

namespace lddmm {
namespace {

LandmarkState build_curve(const CurveSpec& c, int dim, const std::string& name) {
  if (c.type == "points") {
    std::vector<int> idx(c.points.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    return LandmarkState::from_points(dim, c.points, {Group{name, idx}});
  }
  if (dim != 2) throw UnsupportedDimension("curve generators produce 2D shapes");
  const Eigen::Vector2d center(c.center.at(0), c.center.at(1));
  if (c.type == "circle") return circle_shape(c.n, center, c.radius, name);
  if (c.type == "flower") return flower_shape(c.n, center, c.r0, c.amplitude, c.petals, name);
  if (c.type == "ellipse") return ellipse_shape(c.n, center, c.a, c.b, name);
  throw InvalidInput("unknown curve type '" + c.type + "'");
}

CurveSpec curve(std::string type, int n, double cx, double cy) {
  CurveSpec c;
  c.type = std::move(type);
  c.n = n;
  c.center = {cx, cy};
  return c;
}

ExperimentConfig multishape_base(const std::string& name) {
  ExperimentConfig c;
  c.name = name;
  c.dim = 2;
  const KernelSpec shape_kernel{KernelFamily::Cubic, 1.0};
  const KernelSpec background_kernel{KernelFamily::Cubic, 0.1};
  c.fields = {{"shape1", shape_kernel, {"ellipse"}},
              {"shape2", shape_kernel, {"flower"}},
              {"background", background_kernel, {"ellipse_bg", "flower_bg"}}};

  const int n = 24;
  CurveSpec e0 = curve("ellipse", n, -0.6, 0.0);
  e0.a = 0.45;
  e0.b = 0.3;
  CurveSpec f0 = curve("flower", n, 0.6, 0.0);
  f0.r0 = 0.35;
  f0.amplitude = 0.06;
  f0.petals = 5;
  CurveSpec e1 = curve("ellipse", n, -0.6, 0.3);
  e1.a = 0.42;
  e1.b = 0.33;
  CurveSpec f1 = curve("flower", n, 0.6, -0.3);
  f1.r0 = 0.35;
  f1.amplitude = 0.09;
  f1.petals = 5;

  c.q0.groups = {{"ellipse", e0, ""}, {"flower", f0, ""}, {"ellipse_bg", {}, "ellipse"}, {"flower_bg", {}, "flower"}};
  c.target.groups = {{"ellipse", e1, ""}, {"flower", f1, ""}, {"ellipse_bg", {}, "ellipse"}, {"flower_bg", {}, "flower"}};
  c.attachment_weight = 10.0;
  c.solver = "shooting";
  c.options.steps = 50;
  c.options.max_inner_iters = 60;
  c.options.grad_tol = 1e-5;
  c.grid = {25, 0.4};
  c.output = "out/" + name;
  c.seed = 1;
  return c;
}

}  // namespace

LandmarkState build_shape(const ShapeSource& src, int dim, const std::filesystem::path& base_dir) {
  if (!src.file.empty()) {
    const std::filesystem::path p = std::filesystem::path(src.file).is_absolute() ? std::filesystem::path(src.file) : base_dir / src.file;
    LandmarkState s = read_shape(p);
    if (s.dim() != dim)
      throw InvalidInput("shape file '" + p.string() + "' has dimension " + std::to_string(s.dim()));
    return s;
  }
  if (src.groups.empty()) throw InvalidInput("a shape source needs a file or at least one group");
  std::vector<LandmarkState> parts;
  for (const auto& g : src.groups) {
    if (g.curve) {
      parts.push_back(build_curve(*g.curve, dim, g.name));
      continue;
    }
    const auto it = std::find_if(parts.begin(), parts.end(), [&](const LandmarkState& s) {
      return s.groups().front().name == g.copy;
    });
    if (it == parts.end()) throw InvalidInput("group '" + g.name + "' copies unknown group '" + g.copy + "'");
    LandmarkState copy = *it;
    std::vector<int> idx(copy.size());
    for (int i = 0; i < copy.size(); ++i) idx[i] = i;
    parts.push_back(LandmarkState(dim, copy.coords(), {Group{g.name, idx}}));
  }
  return concatenate(parts);
}

ConstraintSet build_constraints(const std::vector<ConstraintDecl>& decls, const LandmarkState& structure,
                                const FieldMap& fields) {
  ConstraintSet cs;
  for (const auto& d : decls) {
    if (d.type == "volume") {
      cs.add(volume_constraint(d.group));
    } else if (d.type == "stitched") {
      const auto& a = structure.group(d.a).indices;
      const auto& b = structure.group(d.b).indices;
      if (a.size() != b.size())
        throw InvalidInput("stitched groups '" + d.a + "' and '" + d.b + "' differ in size");
      std::vector<std::pair<int, int>> pairs;
      for (std::size_t i = 0; i < a.size(); ++i) pairs.emplace_back(a[i], b[i]);
      cs.add(stitched_constraint(std::move(pairs)));
    } else if (d.type == "sliding") {
      fields.field_index(d.field);
      cs.add(sliding_constraint(d.field, closed_segments(structure, d.group)));
    } else if (d.type == "linear") {
      const Eigen::Index cols = structure.coords().size();
      Matrix rows(static_cast<Eigen::Index>(d.rows.size()), cols);
      for (std::size_t r = 0; r < d.rows.size(); ++r) {
        if (static_cast<Eigen::Index>(d.rows[r].size()) != cols)
          throw InvalidInput("linear constraint row " + std::to_string(r) + " needs " + std::to_string(cols) +
                             " entries");
        for (Eigen::Index c = 0; c < cols; ++c) rows(static_cast<Eigen::Index>(r), c) = d.rows[r][c];
      }
      cs.add(linear_kinetic_constraint(std::move(rows)));
    } else {
      throw InvalidInput("unknown constraint type '" + d.type + "'");
    }
  }
  return cs;
}

MatchProblem build_problem(const ExperimentConfig& cfg, const std::filesystem::path& base_dir) {
  LandmarkState q0 = build_shape(cfg.q0, cfg.dim, base_dir);
  LandmarkState target = build_shape(cfg.target, cfg.dim, base_dir);
  FieldMap fields(cfg.fields, q0);
  ConstraintSet cs = build_constraints(cfg.constraints, q0, fields);
  ShapeModel model(q0, std::move(fields), std::move(cs));
  return MatchProblem(std::move(model), std::move(q0), std::move(target), cfg.attachment_weight);
}

Vector initial_momentum(const ExperimentConfig& cfg, const MatchProblem& problem) {
  const Eigen::Index nd = problem.q0.coords().size();
  const auto& m = cfg.initial_momentum;
  if (m.kind == "zero") return Vector::Zero(nd);
  if (m.kind == "values") {
    if (static_cast<Eigen::Index>(m.values.size()) != nd)
      throw InvalidInput("initial_momentum.values needs " + std::to_string(nd) + " entries");
    return Eigen::Map<const Vector>(m.values.data(), nd);
  }
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector p(nd);
  for (Eigen::Index i = 0; i < nd; ++i) p[i] = m.scale * normal(rng);
  return p;
}

std::vector<std::string> builtin_example_names() {
  return {"volume-circle", "multishape-stitched", "multishape-sliding"};
}

ExperimentConfig builtin_example(const std::string& name) {
  if (name == "volume-circle") {
    ExperimentConfig c;
    c.name = name;
    c.dim = 2;
    c.fields = {{"field", {KernelFamily::Gaussian, 0.7}, {"shape"}}};
    CurveSpec start = curve("circle", 32, 0.0, 0.0);
    start.radius = 1.0;
    CurveSpec goal = curve("circle", 32, 2.0, 0.0);
    goal.radius = 1.0;
    c.q0.groups = {{"shape", start, ""}};
    c.target.groups = {{"shape", goal, ""}};
    c.attachment_weight = 20.0;
    c.constraints = {{"volume", "shape", "", "", "", {}}};
    c.solver = "shooting";
    c.options.steps = 50;
    c.options.max_inner_iters = 150;
    c.options.grad_tol = 1e-5;
    c.grid = {25, 1.0};
    c.output = "out/" + name;
    c.seed = 1;
    return c;
  }
  if (name == "multishape-stitched") {
    ExperimentConfig c = multishape_base(name);
    c.constraints = {{"stitched", "", "ellipse", "ellipse_bg", "", {}}, {"stitched", "", "flower", "flower_bg", "", {}}};
    return c;
  }
  if (name == "multishape-sliding") {
    ExperimentConfig c = multishape_base(name);
    c.constraints = {{"sliding", "ellipse_bg", "", "", "shape1", {}}, {"sliding", "flower_bg", "", "", "shape2", {}}};
    return c;
  }
  throw InvalidInput("unknown example '" + name + "'");
}

void add_metrics(const ExperimentConfig& cfg, const MatchProblem& problem, const Trajectory& traj,
                 SolveReport& report) {
  const ShapeModel& model = problem.model;
  const double diam = diameter(problem.q0);
  if (model.dim() == 2) {
    for (const auto& g : problem.q0.groups()) {
      if (g.indices.size() < 3) continue;
      const double v0 = polygon_volume(problem.q0, g.name);
      if (v0 == 0.0) continue;
      double drift = 0.0, low = 1.0;
      for (const auto& q : traj.q) {
        const double v = polygon_volume(model.state(q), g.name);
        drift = std::max(drift, std::abs(v - v0) / std::abs(v0));
        low = std::min(low, v / v0);
      }
      report.metrics.emplace_back("volume_drift." + g.name, drift);
      report.metrics.emplace_back("volume_min_ratio." + g.name, low);
    }
  }
  double residual = 0.0;
  if (model.constrained()) {
    if (traj.kind == Trajectory::Kind::Geodesic) {
      for (std::size_t i = 0; i < traj.q.size(); ++i) {
        const ConstraintFrame f = model.frame(traj.q[i]);
        residual = std::max(residual, max_abs(f.apply_c(f.kernel().apply(traj.slot_momentum[i]))));
      }
    } else {
      for (const auto& c : traj.constraint) residual = std::max(residual, max_abs(c));
    }
    report.metrics.emplace_back("constraint_residual", residual);
  }
  const int d = model.dim();
  auto max_separation = [&](const std::vector<int>& a, const std::vector<int>& b) {
    double worst = 0.0;
    for (const auto& q : traj.q)
      for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
        worst = std::max(worst, (q.segment(a[i] * d, d) - q.segment(b[i] * d, d)).norm());
    return worst;
  };
  double stitched = -1.0, slip = -1.0;
  for (const auto& c : cfg.constraints) {
    if (c.type == "stitched") {
      stitched = std::max(stitched, max_separation(problem.q0.group(c.a).indices, problem.q0.group(c.b).indices));
    } else if (c.type == "sliding") {
      const auto& groups = model.fields().field(model.fields().field_index(c.field)).groups;
      for (const auto& g : groups)
        if (problem.q0.group(g).indices.size() == problem.q0.group(c.group).indices.size())
          slip = std::max(slip, max_separation(problem.q0.group(c.group).indices, problem.q0.group(g).indices));
    }
  }
  if (stitched >= 0.0) report.metrics.emplace_back("stitched_mismatch_rel", stitched / diam);
  if (slip >= 0.0) report.metrics.emplace_back("tangential_slip_rel", slip / diam);
}

namespace {

std::optional<GridSample> make_grid(const ExperimentConfig& cfg, const MatchProblem& problem, const Trajectory& traj) {
  if (problem.model.dim() != 2) return std::nullopt;
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const LandmarkState* s : {&problem.q0, &problem.target})
    for (int i = 0; i < s->size(); ++i) {
      lo = lo.cwiseMin(Eigen::Vector2d(s->point(i)));
      hi = hi.cwiseMax(Eigen::Vector2d(s->point(i)));
    }
  lo.array() -= cfg.grid.margin;
  hi.array() += cfg.grid.margin;
  return deform_grid(problem.model, traj, lo, hi, cfg.grid.resolution);
}

void write_outputs(const ExperimentConfig& cfg, const MatchProblem& problem, const RunResult& r,
                   const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_config(cfg, dir / "config.json");
  write_trajectory(r.traj, dir / "trajectory.txt");
  write_report(r.report, dir / "report.json");
  write_shape(problem.q0.with_coords(r.traj.q.back()), dir / "final_shape.json");
  write_shape(problem.target, dir / "target_shape.json");
  if (r.grid) write_grid(*r.grid, dir / "grid.txt");
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& base_dir,
                         const std::optional<std::filesystem::path>& out_dir) {
  const MatchProblem problem = build_problem(cfg, base_dir);
  RunResult r;
  if (cfg.solver == "shooting") {
    ShootingResult s = minimize_shooting(problem, initial_momentum(cfg, problem), cfg.options);
    r.report = std::move(s.report);
    r.traj = std::move(s.traj);
  } else {
    AlResult a = minimize_augmented_lagrangian(problem, cfg.options);
    r.report = std::move(a.report);
    r.traj = std::move(a.traj);
  }
  add_metrics(cfg, problem, r.traj, r.report);
  if (out_dir) {
    r.grid = make_grid(cfg, problem, r.traj);
    write_outputs(cfg, problem, r, *out_dir);
  }
  return r;
}

RunResult shoot_experiment(const ExperimentConfig& cfg, const std::filesystem::path& base_dir,
                           const std::optional<std::filesystem::path>& out_dir) {
  const MatchProblem problem = build_problem(cfg, base_dir);
  ShootingEval e = shooting_objective(problem, initial_momentum(cfg, problem), cfg.options);
  RunResult r;
  r.report.solver = "geodesic";
  r.report.objective = e.objective;
  r.report.kinetic = e.kinetic;
  r.report.attachment = e.attachment;
  r.report.metrics.emplace_back("energy_drift", e.traj.energy_drift());
  r.traj = std::move(e.traj);
  add_metrics(cfg, problem, r.traj, r.report);
  for (const auto& [k, v] : r.report.metrics)
    if (k == "constraint_residual") r.report.max_violation = v;
  if (out_dir) {
    r.grid = make_grid(cfg, problem, r.traj);
    write_outputs(cfg, problem, r, *out_dir);
  }
  return r;
}

GradientCheck check_gradient(const ExperimentConfig& cfg, const std::filesystem::path& base_dir) {
  const MatchProblem problem = build_problem(cfg, base_dir);
  GradientCheck out;
  out.solver = cfg.solver;
  Vector analytic, fd;
  double value = 0.0, h = 0.0;
  if (cfg.solver == "shooting") {
    const Vector p0 = initial_momentum(cfg, problem);
    const ShootingEval e = shooting_objective_grad(problem, p0, cfg.options);
    analytic = e.grad;
    value = e.objective;
    h = 1e-5 * (1.0 + max_abs(p0));
    fd.resize(p0.size());
    for (Eigen::Index j = 0; j < p0.size(); ++j) {
      Vector a = p0, b = p0;
      a[j] += h;
      b[j] -= h;
      fd[j] = (shooting_objective(problem, a, cfg.options).objective -
               shooting_objective(problem, b, cfg.options).objective) /
              (2.0 * h);
    }
  } else {
    const int steps = cfg.options.steps;
    const Eigen::Index nd = problem.q0.coords().size();
    const int k = problem.model.constraint_rows();
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double scale = cfg.initial_momentum.kind == "random" ? cfg.initial_momentum.scale : 0.0;
    Controls u(steps, Vector::Zero(nd)), lambda(steps, Vector::Zero(k));
    for (auto& v : u)
      for (Eigen::Index i = 0; i < nd; ++i) v[i] = scale * normal(rng);
    for (auto& l : lambda)
      for (int i = 0; i < k; ++i) l[i] = scale * normal(rng);
    const double mu = cfg.options.al.mu0;
    const AlEval e = al_gradient(problem, u, lambda, mu, true);
    value = e.value;
    analytic.resize(steps * nd);
    for (int i = 0; i < steps; ++i) analytic.segment(i * nd, nd) = e.grad[i];
    double umax = 0.0;
    for (const auto& v : u) umax = std::max(umax, max_abs(v));
    h = 1e-5 * (1.0 + umax);
    fd.resize(analytic.size());
    for (int i = 0; i < steps; ++i)
      for (Eigen::Index j = 0; j < nd; ++j) {
        Controls a = u, b = u;
        a[i][j] += h;
        b[i][j] -= h;
        fd[i * nd + j] = (al_gradient(problem, a, lambda, mu, false).value -
                          al_gradient(problem, b, lambda, mu, false).value) /
                         (2.0 * h);
      }
  }
  out.coordinates = static_cast<int>(analytic.size());
  out.analytic_norm = analytic.norm();
  out.fd_norm = fd.norm();
  // Central differences cannot resolve slopes below their rounding floor.
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(value)) / h *
                       std::sqrt(static_cast<double>(analytic.size()));
  if (out.fd_norm <= floor && out.analytic_norm <= floor) {
    out.defined = false;
  } else if (out.fd_norm == 0.0) {
    out.error = std::numeric_limits<double>::infinity();
  } else {
    out.error = (analytic - fd).norm() / out.fd_norm;
  }
  return out;
}

OracleComparison compare_with_oracle(const ExperimentConfig& cfg, const std::filesystem::path& base_dir,
                                     int grid_resolution) {
  const MatchProblem problem = build_problem(cfg, base_dir);
  OracleComparison c;
  c.shooting = minimize_shooting(problem, Vector::Zero(problem.q0.coords().size()), cfg.options).report.objective;
  c.augmented_lagrangian = minimize_augmented_lagrangian(problem, cfg.options).report.objective;
  c.oracle = brute_force_oracle(problem, cfg.options.steps, grid_resolution).objective;
  const double lo = std::min({std::abs(c.shooting), std::abs(c.augmented_lagrangian), std::abs(c.oracle)});
  const double hi = std::max({c.shooting, c.augmented_lagrangian, c.oracle});
  const double mn = std::min({c.shooting, c.augmented_lagrangian, c.oracle});
  c.spread = lo > 0.0 ? (hi - mn) / lo : (hi - mn == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
  return c;
}

}  // namespace lddmm
