#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lddmm/io.hpp"
#include "lddmm/optim.hpp"

namespace lddmm {

/// Builds a landmark state from a source; files are resolved against base_dir.
LandmarkState build_shape(const ShapeSource& src, int dim, const std::filesystem::path& base_dir = {});
ConstraintSet build_constraints(const std::vector<ConstraintDecl>& decls, const LandmarkState& structure,
                                const FieldMap& fields);
MatchProblem build_problem(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {});

/// Initial momentum from the config (zero, seeded Gaussian, or explicit values).
Vector initial_momentum(const ExperimentConfig& cfg, const MatchProblem& problem);

std::vector<std::string> builtin_example_names();
/// Built-in experiment configs; throws InvalidInput for unknown names.
ExperimentConfig builtin_example(const std::string& name);

/// Diagnostics of a trajectory under the problem's geometry: volume drift and
/// minimum volume ratio per closed 2D group, stitched mismatch, constraint
/// residual, tangential slip of sliding curves.
void add_metrics(const ExperimentConfig& cfg, const MatchProblem& problem, const Trajectory& traj,
                 SolveReport& report);

struct RunResult {
  SolveReport report;
  Trajectory traj;
  std::optional<GridSample> grid;
};

/// Solves the configured problem. Outputs are written to out_dir when given.
RunResult run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {},
                         const std::optional<std::filesystem::path>& out_dir = std::nullopt);
/// One forward geodesic from the configured initial momentum.
RunResult shoot_experiment(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {},
                           const std::optional<std::filesystem::path>& out_dir = std::nullopt);

struct GradientCheck {
  std::string solver;
  bool defined = true;  // false when both gradients vanish (0/0)
  double error = 0.0;   // |g - fd| / |fd|
  double analytic_norm = 0.0;
  double fd_norm = 0.0;
  int coordinates = 0;
};

/// Compares the configured solver's gradient with central differences at the
/// configured initial point (random controls and multipliers for the AL).
GradientCheck check_gradient(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {});

struct OracleComparison {
  double shooting = 0.0;
  double augmented_lagrangian = 0.0;
  double oracle = 0.0;
  double spread = 0.0;  // largest pairwise difference over the smallest |objective|
};

OracleComparison compare_with_oracle(const ExperimentConfig& cfg, const std::filesystem::path& base_dir = {},
                                     int grid_resolution = 20);

}  // namespace lddmm
