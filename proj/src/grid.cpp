#include "lddmm/grid.hpp"

#include "lddmm/error.hpp"
#include "lddmm/shapes.hpp"

namespace lddmm {
namespace {

// Velocity at labelled points from sources with field labels and momenta.
Vector field_velocity(const FieldMap& fields, int d, const Vector& points, const std::vector<int>& labels,
                      const Vector& sources, const std::vector<int>& source_fields, const Vector& momenta) {
  Vector out = Vector::Zero(points.size());
  for (int f = 0; f < fields.size(); ++f) {
    std::vector<int> tgt, src;
    for (std::size_t k = 0; k < labels.size(); ++k)
      if (labels[k] == f) tgt.push_back(static_cast<int>(k));
    for (std::size_t s = 0; s < source_fields.size(); ++s)
      if (source_fields[s] == f) src.push_back(static_cast<int>(s));
    if (tgt.empty() || src.empty()) continue;
    Vector ty(static_cast<Eigen::Index>(tgt.size()) * d), sx(static_cast<Eigen::Index>(src.size()) * d);
    Matrix mom(src.size(), d);
    for (std::size_t a = 0; a < tgt.size(); ++a) ty.segment(a * d, d) = points.segment(tgt[a] * d, d);
    for (std::size_t b = 0; b < src.size(); ++b) {
      sx.segment(b * d, d) = sources.segment(src[b] * d, d);
      mom.row(b) = momenta.segment(src[b] * d, d).transpose();
    }
    const Matrix v = cross_kernel(fields.field(f).kernel, d, ty, sx) * mom;
    for (std::size_t a = 0; a < tgt.size(); ++a) out.segment(tgt[a] * d, d) = v.row(a).transpose();
  }
  return out;
}

struct Joint {
  Vector q, p, y;
};

}  // namespace

std::vector<Vector> deform_points(const ShapeModel& model, const Trajectory& traj, const Vector& points,
                                  const std::vector<int>& labels) {
  const int d = model.dim();
  if (points.size() != static_cast<Eigen::Index>(labels.size()) * d)
    throw InvalidInput("one field label per point is required");
  for (int l : labels)
    if (l < 0 || l >= model.fields().size()) throw InvalidInput("point label is not a field index");
  if (traj.landmarks != model.size() || traj.dim != d) throw InvalidInput("trajectory does not match the model");

  const bool geodesic = traj.kind == Trajectory::Kind::Geodesic;
  const SlotLayout& layout = model.layout();
  std::vector<int> landmark_fields(model.fields().labels().begin(), model.fields().labels().end());

  auto slot_positions = [&](const Vector& q) {
    Vector x(static_cast<Eigen::Index>(layout.count()) * d);
    for (int s = 0; s < layout.count(); ++s) x.segment(s * d, d) = q.segment(layout.point(s) * d, d);
    return x;
  };

  // Derivative of (q, p, y) for a geodesic, or of (q, y) under control u.
  auto rate = [&](const Joint& j, const Vector* u) {
    Joint out;
    if (geodesic) {
      const GeodesicRhs r = geodesic_rhs(model, j.q, j.p);
      out.q = r.qdot;
      out.p = r.pdot;
      out.y = field_velocity(model.fields(), d, j.y, labels, slot_positions(j.q), layout.fields(), r.slot_momentum);
    } else {
      out.q = model.kernel(j.q).apply(*u);
      out.p = Vector(0);
      out.y = field_velocity(model.fields(), d, j.y, labels, j.q, landmark_fields, *u);
    }
    return out;
  };
  auto axpy = [](const Joint& a, double h, const Joint& k) {
    return Joint{a.q + h * k.q, a.p.size() ? Vector(a.p + h * k.p) : a.p, a.y + h * k.y};
  };

  const double dt = traj.dt();
  std::vector<Vector> out{points};
  Vector y = points;
  for (int i = 0; i < traj.steps; ++i) {
    const Vector* u = geodesic ? nullptr : &traj.m[i];
    const Joint j0{traj.q[i], geodesic ? traj.m[i] : Vector(0), y};
    const Joint k1 = rate(j0, u);
    const Joint k2 = rate(axpy(j0, 0.5 * dt, k1), u);
    const Joint k3 = rate(axpy(j0, 0.5 * dt, k2), u);
    const Joint k4 = rate(axpy(j0, dt, k3), u);
    y += dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y);
    check_finite_state(y, 1e8 * (1.0 + max_abs(points)), i, "grid");
    out.push_back(y);
  }
  return out;
}

int region_field(const ShapeModel& model, const LandmarkState& q, const Eigen::Vector2d& y) {
  const FieldMap& fields = model.fields();
  if (fields.size() == 1) return 0;
  for (int f = 0; f < fields.size(); ++f) {
    const auto& groups = fields.field(f).groups;
    if (groups.size() != 1) continue;
    if (q.group(groups.front()).indices.size() < 3) continue;
    if (inside_polygon(q, groups.front(), y)) return f;
  }
  return fields.size() - 1;
}

GridSample deform_grid(const ShapeModel& model, const Trajectory& traj, const Eigen::Vector2d& lower,
                       const Eigen::Vector2d& upper, int m) {
  if (model.dim() != 2) throw UnsupportedDimension("grid deformation is implemented for d = 2");
  if (m < 2) throw InvalidInput("grid resolution must be >= 2");
  if (!(upper.array() > lower.array()).all()) throw InvalidInput("grid box must have positive extent");
  GridSample g;
  g.lower = lower;
  g.upper = upper;
  g.resolution = m;
  g.start.resize(2 * m * m);
  std::vector<int> labels(m * m);
  const LandmarkState q0 = model.state(traj.q.front());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const int k = i * m + j;
      const Eigen::Vector2d y(lower[0] + (upper[0] - lower[0]) * j / (m - 1),
                              lower[1] + (upper[1] - lower[1]) * i / (m - 1));
      g.start.segment<2>(2 * k) = y;
      labels[k] = region_field(model, q0, y);
    }
  g.end = deform_points(model, traj, g.start, labels).back();
  return g;
}

}  // namespace lddmm
