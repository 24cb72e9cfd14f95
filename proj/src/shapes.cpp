#include "lddmm/shapes.hpp"

#include <cmath>
#include <numbers>

#include "lddmm/error.hpp"

namespace lddmm {
namespace {

const Group& polygon_group(const LandmarkState& q, std::string_view group) {
  if (q.dim() != 2)
    throw UnsupportedDimension("polygon volume needs d = 2, got d = " + std::to_string(q.dim()));
  const Group& g = q.group(group);
  if (g.indices.size() < 3) throw InvalidInput("polygon group '" + g.name + "' has fewer than 3 points");
  return g;
}

void check_pair(const LandmarkState& q, const LandmarkState& target) {
  if (q.dim() != target.dim() || q.size() != target.size())
    throw InvalidInput("shape and target differ in dimension or landmark count");
}

LandmarkState sample_curve(int n, const std::string& group, auto&& point) {
  if (n < 3) throw InvalidInput("curve generators need n >= 3");
  Vector coords(2 * n);
  for (int i = 0; i < n; ++i) {
    const double theta = 2.0 * std::numbers::pi * i / n;
    const Eigen::Vector2d x = point(theta);
    coords.segment<2>(2 * i) = x;
  }
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  return LandmarkState(2, std::move(coords), {Group{group, std::move(idx)}});
}

}  // namespace

double polygon_volume(const LandmarkState& q, std::string_view group) {
  const auto& idx = polygon_group(q, group).indices;
  const std::size_t m = idx.size();
  double twice = 0.0;
  for (std::size_t a = 0; a < m; ++a) {
    const auto x = q.point(idx[a]);
    const auto y = q.point(idx[(a + 1) % m]);
    twice += x[0] * y[1] - x[1] * y[0];
  }
  return 0.5 * twice;
}

Vector volume_gradient(const LandmarkState& q, std::string_view group) {
  const auto& idx = polygon_group(q, group).indices;
  const std::size_t m = idx.size();
  Vector grad = Vector::Zero(q.coords().size());
  for (std::size_t a = 0; a < m; ++a) {
    const auto next = q.point(idx[(a + 1) % m]);
    const auto prev = q.point(idx[(a + m - 1) % m]);
    grad[2 * idx[a]] = 0.5 * (next[1] - prev[1]);
    grad[2 * idx[a] + 1] = 0.5 * (prev[0] - next[0]);
  }
  return grad;
}

double attachment(const LandmarkState& q, const LandmarkState& target, double c) {
  check_pair(q, target);
  return c / q.size() * (q.coords() - target.coords()).squaredNorm();
}

Vector attachment_gradient(const LandmarkState& q, const LandmarkState& target, double c) {
  check_pair(q, target);
  return 2.0 * c / q.size() * (q.coords() - target.coords());
}

AttachmentValue grouped_attachment(const LandmarkState& q, const LandmarkState& target, double c) {
  check_pair(q, target);
  AttachmentValue out{0.0, Vector::Zero(q.coords().size())};
  const int d = q.dim();
  for (const auto& g : q.groups()) {
    const double w = c / static_cast<double>(g.indices.size());
    for (int i : g.indices) {
      const auto diff = q.point(i) - target.point(i);
      out.value += w * diff.squaredNorm();
      out.gradient.segment(i * d, d) = 2.0 * w * diff;
    }
  }
  return out;
}

AttachmentValue multishape_attachment(const LandmarkState& q, const std::vector<ShapeTarget>& targets,
                                      double c) {
  AttachmentValue out{0.0, Vector::Zero(q.coords().size())};
  const int d = q.dim();
  for (const auto& t : targets) {
    for (const std::string* name : {&t.shape_group, &t.background_group}) {
      const Group& g = q.group(*name);
      if (t.points.size() != static_cast<Eigen::Index>(g.indices.size()) * d)
        throw InvalidInput("target for group '" + g.name + "' has the wrong size");
      const double w = c / static_cast<double>(g.indices.size());
      for (std::size_t a = 0; a < g.indices.size(); ++a) {
        const int i = g.indices[a];
        const Vector diff = q.point(i) - t.points.segment(a * d, d);
        out.value += w * diff.squaredNorm();
        out.gradient.segment(i * d, d) += 2.0 * w * diff;
      }
    }
  }
  return out;
}

LandmarkState circle_shape(int n, const Eigen::Vector2d& center, double radius, const std::string& group) {
  return sample_curve(n, group, [&](double th) {
    return Eigen::Vector2d(center[0] + radius * std::cos(th), center[1] + radius * std::sin(th));
  });
}

LandmarkState flower_shape(int n, const Eigen::Vector2d& center, double r0, double amplitude, int petals,
                           const std::string& group) {
  return sample_curve(n, group, [&](double th) {
    const double r = r0 + amplitude * std::cos(petals * th);
    return Eigen::Vector2d(center[0] + r * std::cos(th), center[1] + r * std::sin(th));
  });
}

LandmarkState ellipse_shape(int n, const Eigen::Vector2d& center, double a, double b, const std::string& group) {
  return sample_curve(n, group, [&](double th) {
    return Eigen::Vector2d(center[0] + a * std::cos(th), center[1] + b * std::sin(th));
  });
}

LandmarkState concatenate(const std::vector<LandmarkState>& parts) {
  if (parts.empty()) throw InvalidInput("nothing to concatenate");
  const int d = parts.front().dim();
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.dim() != d) throw InvalidInput("cannot concatenate states of different dimension");
    total += p.coords().size();
  }
  Vector coords(total);
  std::vector<Group> groups;
  int offset = 0;
  for (const auto& p : parts) {
    coords.segment(static_cast<Eigen::Index>(offset) * d, p.coords().size()) = p.coords();
    for (const auto& g : p.groups()) {
      Group shifted{g.name, g.indices};
      for (int& i : shifted.indices) i += offset;
      groups.push_back(std::move(shifted));
    }
    offset += p.size();
  }
  return LandmarkState(d, std::move(coords), std::move(groups));
}

double diameter(const LandmarkState& q) {
  double best = 0.0;
  for (int i = 0; i < q.size(); ++i)
    for (int j = i + 1; j < q.size(); ++j) best = std::max(best, (q.point(i) - q.point(j)).norm());
  return best;
}

bool inside_polygon(const LandmarkState& q, std::string_view group, const Eigen::Vector2d& y) {
  const auto& idx = polygon_group(q, group).indices;
  bool inside = false;
  const std::size_t m = idx.size();
  for (std::size_t a = 0, b = m - 1; a < m; b = a++) {
    const auto pa = q.point(idx[a]);
    const auto pb = q.point(idx[b]);
    if ((pa[1] > y[1]) != (pb[1] > y[1]) &&
        y[0] < (pb[0] - pa[0]) * (y[1] - pa[1]) / (pb[1] - pa[1]) + pa[0])
      inside = !inside;
  }
  return inside;
}

}  // namespace lddmm
