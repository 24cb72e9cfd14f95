#include "lddmm/landmarks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lddmm/error.hpp"

namespace lddmm {

LandmarkState::LandmarkState(int dim, Vector coords, std::vector<Group> groups)
    : dim_(dim), coords_(std::move(coords)), groups_(std::move(groups)) {
  if (dim_ < 1) throw InvalidInput("landmark dimension must be >= 1");
  if (coords_.size() == 0 || coords_.size() % dim_ != 0)
    throw InvalidInput("landmark coordinates must hold n >= 1 points of dimension " +
                       std::to_string(dim_));
  if (!coords_.allFinite()) throw InvalidInput("landmark coordinates must be finite");

  const int n = size();
  if (groups_.empty()) {
    Group all{"shape", std::vector<int>(n)};
    std::iota(all.indices.begin(), all.indices.end(), 0);
    groups_.push_back(std::move(all));
    return;
  }
  std::vector<int> seen(n, 0);
  for (const auto& g : groups_) {
    if (g.name.empty()) throw InvalidInput("group names must be non-empty");
    if (g.indices.empty()) throw InvalidInput("group '" + g.name + "' is empty");
    for (int i : g.indices) {
      if (i < 0 || i >= n)
        throw InvalidInput("group '" + g.name + "' references landmark " + std::to_string(i) +
                           " outside [0, " + std::to_string(n) + ")");
      if (seen[i]++) throw InvalidInput("landmark " + std::to_string(i) + " belongs to two groups");
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw InvalidInput("groups must cover every landmark");
  for (std::size_t a = 0; a < groups_.size(); ++a)
    for (std::size_t b = a + 1; b < groups_.size(); ++b)
      if (groups_[a].name == groups_[b].name)
        throw InvalidInput("duplicate group name '" + groups_[a].name + "'");
}

LandmarkState LandmarkState::from_points(int dim, const std::vector<std::vector<double>>& points,
                                         std::vector<Group> groups) {
  Vector coords(static_cast<Eigen::Index>(points.size()) * dim);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (static_cast<int>(points[i].size()) != dim)
      throw InvalidInput("point " + std::to_string(i) + " has dimension " +
                         std::to_string(points[i].size()) + ", expected " + std::to_string(dim));
    for (int c = 0; c < dim; ++c) coords[static_cast<Eigen::Index>(i) * dim + c] = points[i][c];
  }
  return LandmarkState(dim, std::move(coords), std::move(groups));
}

const Group& LandmarkState::group(std::string_view name) const {
  for (const auto& g : groups_)
    if (g.name == name) return g;
  throw InvalidInput("unknown group '" + std::string(name) + "'");
}

bool LandmarkState::has_group(std::string_view name) const {
  return std::any_of(groups_.begin(), groups_.end(), [&](const Group& g) { return g.name == name; });
}

bool LandmarkState::same_structure(const LandmarkState& other) const {
  return dim_ == other.dim_ && coords_.size() == other.coords_.size() && groups_ == other.groups_;
}

LandmarkState LandmarkState::with_coords(Vector coords) const {
  if (coords.size() != coords_.size())
    throw InvalidInput("coordinate vector size does not match the landmark structure");
  if (!coords.allFinite()) throw InvalidInput("landmark coordinates must be finite");
  LandmarkState out = *this;
  out.coords_ = std::move(coords);
  return out;
}

LandmarkState LandmarkState::subset(std::string_view group_name) const {
  const Group& g = group(group_name);
  Vector c(static_cast<Eigen::Index>(g.indices.size()) * dim_);
  for (std::size_t k = 0; k < g.indices.size(); ++k)
    c.segment(static_cast<Eigen::Index>(k) * dim_, dim_) = point(g.indices[k]);
  return LandmarkState(dim_, std::move(c));
}

bool LandmarkState::operator==(const LandmarkState& other) const {
  return same_structure(other) && coords_ == other.coords_;
}

double max_abs(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace lddmm
