#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lddmm/geodesics.hpp"
#include "lddmm/kernels.hpp"
#include "lddmm/optim.hpp"

namespace lddmm {

/// Parametric curve or explicit point list used to build one group.
struct CurveSpec {
  std::string type;  // circle | flower | ellipse | points
  int n = 0;
  std::vector<double> center = {0.0, 0.0};
  double radius = 1.0;
  double r0 = 1.0;
  double amplitude = 0.0;
  int petals = 5;
  double a = 1.0;
  double b = 1.0;
  std::vector<std::vector<double>> points;

  bool operator==(const CurveSpec&) const = default;
};

struct GroupSource {
  std::string name;
  std::optional<CurveSpec> curve;
  std::string copy;  // name of an earlier group whose points are duplicated

  bool operator==(const GroupSource&) const = default;
};

/// Where a landmark state comes from: a shape file or a list of groups.
struct ShapeSource {
  std::string file;
  std::vector<GroupSource> groups;

  bool operator==(const ShapeSource&) const = default;
};

struct ConstraintDecl {
  std::string type;   // volume | stitched | sliding | linear
  std::string group;  // volume: polygon; sliding: background curve
  std::string a, b;   // stitched: paired groups
  std::string field;  // sliding: field of the shape seen from the background curve
  std::vector<std::vector<double>> rows;  // linear

  bool operator==(const ConstraintDecl&) const = default;
};

struct InitialMomentum {
  std::string kind = "zero";  // zero | random | values
  double scale = 0.0;
  std::vector<double> values;

  bool operator==(const InitialMomentum&) const = default;
};

struct GridOptions {
  int resolution = 21;
  double margin = 0.5;

  bool operator==(const GridOptions&) const = default;
};

struct ExperimentConfig {
  std::string name = "experiment";
  int dim = 2;
  std::vector<FieldSpec> fields;
  ShapeSource q0;
  ShapeSource target;
  double attachment_weight = 1.0;
  std::vector<ConstraintDecl> constraints;
  std::string solver = "shooting";  // shooting | augmented_lagrangian
  SolverOptions options;
  InitialMomentum initial_momentum;
  GridOptions grid;
  std::string output = "out";
  std::uint64_t seed = 0;
};

/// Parses a config; `origin` names the source in error messages.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "config");
ExperimentConfig read_config(const std::filesystem::path& path);
std::string config_to_string(const ExperimentConfig& cfg);
void write_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

/// Shape files: {"dim": d, "groups": [{"name": ..., "points": [[...], ...]}]}.
/// Group members are stored in landmark order, groups in listed order.
LandmarkState parse_shape(const std::string& text, const std::string& origin = "shape");
LandmarkState read_shape(const std::filesystem::path& path);
std::string shape_to_string(const LandmarkState& q);
void write_shape(const LandmarkState& q, const std::filesystem::path& path);

/// Plain-text trajectory: header, one row per (node, landmark), one row per node.
std::string trajectory_to_string(const Trajectory& traj);
Trajectory parse_trajectory(const std::string& text, const std::string& origin = "trajectory");
void write_trajectory(const Trajectory& traj, const std::filesystem::path& path);
Trajectory read_trajectory(const std::filesystem::path& path);

std::string report_to_string(const SolveReport& report);
void write_report(const SolveReport& report, const std::filesystem::path& path);

/// Grid nodes carried by the deformation of a trajectory (2D).
struct GridSample {
  Eigen::Vector2d lower = Eigen::Vector2d::Zero();
  Eigen::Vector2d upper = Eigen::Vector2d::Zero();
  int resolution = 0;
  Vector start;  // m*m points, row-major in (i, j)
  Vector end;
};

std::string grid_to_string(const GridSample& grid);
void write_grid(const GridSample& grid, const std::filesystem::path& path);

/// "%.17g"
std::string format_double(double v);
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace lddmm
