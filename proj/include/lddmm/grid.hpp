#pragma once

#include <vector>

#include "lddmm/geodesics.hpp"
#include "lddmm/io.hpp"
#include "lddmm/model.hpp"

namespace lddmm {

/// Carries free points through the velocity fields of a trajectory. Point k is
/// moved by field labels[k]; each RK4 step is replayed jointly with the
/// landmarks from the stored node data, so points and landmarks see the same
/// vector field. Returns the point positions at every node.
std::vector<Vector> deform_points(const ShapeModel& model, const Trajectory& traj, const Vector& points,
                                  const std::vector<int>& labels);

/// Field that governs a 2D point: a field with a single closed curve owns the
/// inside of that curve (as drawn at q), everything else belongs to the last
/// field of the map.
int region_field(const ShapeModel& model, const LandmarkState& q, const Eigen::Vector2d& y);

/// m x m grid over [lower, upper] carried from t = 0 to t = 1.
GridSample deform_grid(const ShapeModel& model, const Trajectory& traj, const Eigen::Vector2d& lower,
                       const Eigen::Vector2d& upper, int m);

}  // namespace lddmm
