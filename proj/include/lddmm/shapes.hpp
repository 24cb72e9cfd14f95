#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lddmm/landmarks.hpp"

namespace lddmm {

/// Signed shoelace area of a group read as a closed polygon in listed order.
/// Counter-clockwise polygons have positive area. Requires d = 2.
double polygon_volume(const LandmarkState& q, std::string_view group);
/// Gradient of polygon_volume over all coordinates; zero outside the group.
Vector volume_gradient(const LandmarkState& q, std::string_view group);

/// (c / n) sum_i |x_i - t_i|^2 over every landmark.
double attachment(const LandmarkState& q, const LandmarkState& target, double c);
Vector attachment_gradient(const LandmarkState& q, const LandmarkState& target, double c);

struct AttachmentValue {
  double value = 0.0;
  Vector gradient;
};

/// Sum over groups of (c / n_g) sum_{i in g} |x_i - t_i|^2. Normalizing per
/// group keeps a curve and its background copy on the same footing.
AttachmentValue grouped_attachment(const LandmarkState& q, const LandmarkState& target, double c);

/// Target curve j of a multishape, matched by the shape group and by its
/// background copy.
struct ShapeTarget {
  std::string shape_group;
  std::string background_group;
  Vector points;  // same layout as either group
};

AttachmentValue multishape_attachment(const LandmarkState& q, const std::vector<ShapeTarget>& targets,
                                      double c);

/// Counter-clockwise uniform samplings; the first point sits at angle 0.
LandmarkState circle_shape(int n, const Eigen::Vector2d& center, double radius,
                           const std::string& group = "shape");
/// r(theta) = r0 + amplitude cos(petals theta)
LandmarkState flower_shape(int n, const Eigen::Vector2d& center, double r0, double amplitude, int petals,
                           const std::string& group = "shape");
LandmarkState ellipse_shape(int n, const Eigen::Vector2d& center, double a, double b,
                            const std::string& group = "shape");

/// Concatenates states of equal dimension; group names must stay unique.
LandmarkState concatenate(const std::vector<LandmarkState>& parts);

/// Largest distance between two landmarks (0 for a single point).
double diameter(const LandmarkState& q);

/// Even-odd test of a 2D point against a group read as a closed polygon.
bool inside_polygon(const LandmarkState& q, std::string_view group, const Eigen::Vector2d& y);

}  // namespace lddmm
