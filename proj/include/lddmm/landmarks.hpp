#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace lddmm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A named subset of landmark indices (one curve of a multishape, a background copy, ...).
struct Group {
  std::string name;
  std::vector<int> indices;

  bool operator==(const Group&) const = default;
};

/// An ordered list of n points in R^d, partitioned into named groups.
///
/// Coordinates are stored landmark-major: point i occupies [i*d, i*d + d).
/// When no groups are given a single group named "shape" covers every index.
class LandmarkState {
 public:
  LandmarkState() = default;
  LandmarkState(int dim, Vector coords, std::vector<Group> groups = {});

  /// Builds a state from a list of points, all of dimension `dim`.
  static LandmarkState from_points(int dim, const std::vector<std::vector<double>>& points,
                                   std::vector<Group> groups = {});

  int dim() const noexcept { return dim_; }
  int size() const noexcept { return dim_ == 0 ? 0 : static_cast<int>(coords_.size()) / dim_; }
  const Vector& coords() const noexcept { return coords_; }

  auto point(int i) const { return coords_.segment(static_cast<Eigen::Index>(i) * dim_, dim_); }

  const std::vector<Group>& groups() const noexcept { return groups_; }
  const Group& group(std::string_view name) const;
  bool has_group(std::string_view name) const;

  /// Same dimension, landmark count and group partition.
  bool same_structure(const LandmarkState& other) const;

  /// Copy of this state with new coordinates (same structure).
  LandmarkState with_coords(Vector coords) const;

  /// The state restricted to one group, as a single-group state.
  LandmarkState subset(std::string_view group_name) const;

  bool operator==(const LandmarkState& other) const;

 private:
  int dim_ = 0;
  Vector coords_;
  std::vector<Group> groups_;
};

/// Infinity norm of a coordinate vector, 0 for empty input.
double max_abs(const Vector& v);

}  // namespace lddmm
