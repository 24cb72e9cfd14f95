#include "lddmm/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lddmm/error.hpp"
#include "lddmm/shapes.hpp"

namespace lddmm {
namespace {

// Rotation by -90 degrees: R (a, b) = (b, -a).
Eigen::Matrix2d rot() {
  Eigen::Matrix2d r;
  r << 0.0, 1.0, -1.0, 0.0;
  return r;
}

void check_index(int i, const LandmarkState& s, const std::string& who) {
  if (i < 0 || i >= s.size())
    throw InvalidInput(who + ": landmark index " + std::to_string(i) + " outside [0, " +
                       std::to_string(s.size()) + ")");
}

class VolumeProvider final : public ConstraintProvider {
 public:
  explicit VolumeProvider(std::string group) : group_(std::move(group)) {}

  std::string name() const override { return "volume(" + group_ + ")"; }
  int rows(const LandmarkState&) const override { return 1; }

  void validate(const LandmarkState& s, const FieldMap&) const override {
    if (s.dim() != 2)
      throw UnsupportedDimension("volume constraint needs d = 2, got d = " + std::to_string(s.dim()));
    if (s.group(group_).indices.size() < 3)
      throw InvalidInput("volume constraint group '" + group_ + "' has fewer than 3 points");
  }

  std::vector<EvalTerm> terms(const LandmarkState& q, const FieldMap& fields) const override {
    validate(q, fields);
    const auto& idx = q.group(group_).indices;
    const std::size_t m = idx.size();
    const Eigen::Matrix2d r = rot();
    std::vector<EvalTerm> out;
    out.reserve(m);
    for (std::size_t a = 0; a < m; ++a) {
      const int i = idx[a];
      const int next = idx[(a + 1) % m];
      const int prev = idx[(a + m - 1) % m];
      EvalTerm t;
      t.row = 0;
      t.field = fields.field_of_point(i);
      t.point = i;
      t.weight = 0.5 * r * (q.point(next) - q.point(prev));
      t.deps = {next, prev};
      t.jacobian.resize(2, 4);
      t.jacobian << 0.5 * r, -0.5 * r;
      out.push_back(std::move(t));
    }
    return out;
  }

 private:
  std::string group_;
};

class StitchedProvider final : public ConstraintProvider {
 public:
  explicit StitchedProvider(std::vector<std::pair<int, int>> pairs) : pairs_(std::move(pairs)) {}

  std::string name() const override { return "stitched(" + std::to_string(pairs_.size()) + " pairs)"; }
  int rows(const LandmarkState& s) const override { return s.dim() * static_cast<int>(pairs_.size()); }

  void validate(const LandmarkState& s, const FieldMap&) const override {
    for (const auto& [a, b] : pairs_) {
      check_index(a, s, "stitched constraint");
      check_index(b, s, "stitched constraint");
      if (a == b) throw InvalidInput("stitched constraint pairs a landmark with itself");
    }
  }

  std::vector<EvalTerm> terms(const LandmarkState& q, const FieldMap& fields) const override {
    validate(q, fields);
    const int d = q.dim();
    std::vector<EvalTerm> out;
    out.reserve(2 * d * pairs_.size());
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
      const auto [a, b] = pairs_[k];
      for (int c = 0; c < d; ++c) {
        const int row = static_cast<int>(k) * d + c;
        Vector e = Vector::Unit(d, c);
        out.push_back({row, fields.field_of_point(a), a, e, {}, {}});
        out.push_back({row, fields.field_of_point(b), b, -e, {}, {}});
      }
    }
    return out;
  }

 private:
  std::vector<std::pair<int, int>> pairs_;
};

class SlidingProvider final : public ConstraintProvider {
 public:
  SlidingProvider(std::string field, std::vector<SlidingSegment> segments)
      : field_(std::move(field)), segments_(std::move(segments)) {}

  std::string name() const override {
    return "sliding(" + field_ + ", " + std::to_string(segments_.size()) + " segments)";
  }
  int rows(const LandmarkState&) const override { return static_cast<int>(segments_.size()); }

  void validate(const LandmarkState& s, const FieldMap& fields) const override {
    if (s.dim() != 2)
      throw UnsupportedDimension("sliding constraint needs d = 2, got d = " + std::to_string(s.dim()));
    fields.field_index(field_);
    for (const auto& seg : segments_) {
      check_index(seg.minus, s, "sliding constraint");
      check_index(seg.plus, s, "sliding constraint");
      if (seg.minus == seg.plus) throw InvalidInput("sliding segment has identical endpoints");
    }
  }

  std::vector<EvalTerm> terms(const LandmarkState& q, const FieldMap& fields) const override {
    validate(q, fields);
    const int shape = fields.field_index(field_);
    // Bounding-box diagonal: within a factor sqrt(2) of the diameter and linear in n.
    const auto pts = q.coords().reshaped(2, q.size());
    const double floor = 1e-12 * (pts.rowwise().maxCoeff() - pts.rowwise().minCoeff()).norm();
    const Eigen::Matrix2d r = rot();
    std::vector<EvalTerm> out;
    out.reserve(4 * segments_.size());
    for (std::size_t l = 0; l < segments_.size(); ++l) {
      const auto& seg = segments_[l];
      const Eigen::Vector2d e = q.point(seg.plus) - q.point(seg.minus);
      const double len = e.norm();
      if (!(len > floor))
        throw DegenerateGeometry("sliding segment " + std::to_string(l) + " has length " +
                                 std::to_string(len));
      const Eigen::Vector2d nu = r * e / len;
      const Eigen::Matrix2d dnu = (Eigen::Matrix2d::Identity() - nu * nu.transpose()) * r / len;
      const int row = static_cast<int>(l);
      for (int end : {seg.minus, seg.plus}) {
        for (const double sign : {1.0, -1.0}) {
          EvalTerm t;
          t.row = row;
          t.field = sign > 0 ? shape : fields.field_of_point(end);
          t.point = end;
          t.weight = 0.5 * sign * nu;
          t.deps = {seg.minus, seg.plus};
          t.jacobian.resize(2, 4);
          t.jacobian << -0.5 * sign * dnu, 0.5 * sign * dnu;
          out.push_back(std::move(t));
        }
      }
    }
    return out;
  }

 private:
  std::string field_;
  std::vector<SlidingSegment> segments_;
};

class LinearProvider final : public ConstraintProvider {
 public:
  LinearProvider(Matrix rows, std::string label) : rows_(std::move(rows)), label_(std::move(label)) {}

  std::string name() const override { return label_ + "(" + std::to_string(rows_.rows()) + " rows)"; }
  int rows(const LandmarkState&) const override { return static_cast<int>(rows_.rows()); }

  void validate(const LandmarkState& s, const FieldMap&) const override {
    if (rows_.cols() != s.coords().size())
      throw InvalidInput("linear constraint has " + std::to_string(rows_.cols()) + " columns, expected " +
                         std::to_string(s.coords().size()));
    if (!rows_.allFinite()) throw InvalidInput("linear constraint rows must be finite");
  }

  std::vector<EvalTerm> terms(const LandmarkState& q, const FieldMap& fields) const override {
    validate(q, fields);
    const int d = q.dim();
    std::vector<EvalTerm> out;
    for (Eigen::Index r = 0; r < rows_.rows(); ++r)
      for (int i = 0; i < q.size(); ++i) {
        Vector w = rows_.row(r).segment(i * d, d).transpose();
        if (w.isZero(0.0)) continue;
        out.push_back({static_cast<int>(r), fields.field_of_point(i), i, std::move(w), {}, {}});
      }
    return out;
  }

 private:
  Matrix rows_;
  std::string label_;
};

}  // namespace

ProviderPtr volume_constraint(std::string group) { return std::make_shared<VolumeProvider>(std::move(group)); }

ProviderPtr stitched_constraint(std::vector<std::pair<int, int>> pairs) {
  return std::make_shared<StitchedProvider>(std::move(pairs));
}

ProviderPtr sliding_constraint(std::string shape_field, std::vector<SlidingSegment> segments) {
  return std::make_shared<SlidingProvider>(std::move(shape_field), std::move(segments));
}

std::vector<SlidingSegment> closed_segments(const LandmarkState& structure, const std::string& group) {
  const auto& idx = structure.group(group).indices;
  if (idx.size() < 3) throw InvalidInput("closed curve '" + group + "' needs at least 3 points");
  std::vector<SlidingSegment> out;
  for (std::size_t a = 0; a < idx.size(); ++a) out.push_back({idx[a], idx[(a + 1) % idx.size()]});
  return out;
}

ProviderPtr linear_kinetic_constraint(Matrix rows, std::string label) {
  return std::make_shared<LinearProvider>(std::move(rows), std::move(label));
}

int ConstraintSet::rows(const LandmarkState& structure) const {
  int k = 0;
  for (const auto& p : providers_) k += p->rows(structure);
  return k;
}

void ConstraintSet::validate(const LandmarkState& structure, const FieldMap& fields) const {
  for (const auto& p : providers_) p->validate(structure, fields);
}

std::vector<EvalTerm> ConstraintSet::terms(const LandmarkState& q, const FieldMap& fields) const {
  std::vector<EvalTerm> out;
  int offset = 0;
  for (const auto& p : providers_) {
    for (auto& t : p->terms(q, fields)) {
      t.row += offset;
      out.push_back(std::move(t));
    }
    offset += p->rows(q);
  }
  return out;
}

SlotLayout::SlotLayout(const LandmarkState& structure, const FieldMap& fields, const ConstraintSet& cs)
    : own_(structure.size()) {
  for (int i = 0; i < own_; ++i) {
    point_.push_back(i);
    field_.push_back(fields.field_of_point(i));
  }
  for (const auto& t : cs.terms(structure, fields)) {
    if (t.field == fields.field_of_point(t.point)) continue;
    bool known = false;
    for (std::size_t s = own_; s < point_.size(); ++s)
      known = known || (point_[s] == t.point && field_[s] == t.field);
    if (!known) {
      point_.push_back(t.point);
      field_.push_back(t.field);
    }
  }
}

int SlotLayout::slot_of(int field, int point) const {
  if (point >= 0 && point < own_ && field_[point] == field) return point;
  for (std::size_t s = own_; s < point_.size(); ++s)
    if (point_[s] == point && field_[s] == field) return static_cast<int>(s);
  throw InvalidInput("no slot for landmark " + std::to_string(point) + " under field " + std::to_string(field));
}

namespace {

Vector slot_positions(const SlotLayout& layout, const LandmarkState& q) {
  const int d = q.dim();
  Vector x(static_cast<Eigen::Index>(layout.count()) * d);
  for (int s = 0; s < layout.count(); ++s) x.segment(s * d, d) = q.point(layout.point(s));
  return x;
}

}  // namespace

ConstraintFrame::ConstraintFrame(const SlotLayout& layout, const FieldMap& fields, const ConstraintSet& cs,
                                 const LandmarkState& q)
    : layout_(layout),
      dim_(q.dim()),
      terms_(cs.terms(q, fields)),
      kernel_(fields.kernels(), q.dim(), slot_positions(layout, q), layout.fields()),
      rows_(cs.rows(q)) {
  term_slot_.reserve(terms_.size());
  for (const auto& t : terms_) term_slot_.push_back(layout_.slot_of(t.field, t.point));
}

Matrix ConstraintFrame::matrix() const {
  Matrix c = Matrix::Zero(rows_, static_cast<Eigen::Index>(layout_.count()) * dim_);
  for (std::size_t n = 0; n < terms_.size(); ++n)
    c.row(terms_[n].row).segment(term_slot_[n] * dim_, dim_) += terms_[n].weight.transpose();
  return c;
}

Vector ConstraintFrame::embed(const Vector& p) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(layout_.count()) * dim_);
  out.head(p.size()) = p;
  return out;
}

Vector ConstraintFrame::restrict(const Vector& v) const {
  return v.head(static_cast<Eigen::Index>(layout_.own()) * dim_);
}

Vector ConstraintFrame::scatter(const Vector& g) const {
  Vector out = restrict(g);
  for (int s = layout_.own(); s < layout_.count(); ++s)
    out.segment(layout_.point(s) * dim_, dim_) += g.segment(s * dim_, dim_);
  return out;
}

Vector ConstraintFrame::weight_gradient(const Vector& lambda, const Vector& v) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(layout_.own()) * dim_);
  for (std::size_t n = 0; n < terms_.size(); ++n) {
    const auto& t = terms_[n];
    if (t.deps.empty() || lambda[t.row] == 0.0) continue;
    const int s = term_slot_[n];
    const Vector g = lambda[t.row] * t.jacobian.transpose() * v.segment(s * dim_, dim_);
    for (std::size_t k = 0; k < t.deps.size(); ++k)
      out.segment(t.deps[k] * dim_, dim_) += g.segment(k * dim_, dim_);
  }
  return out;
}

Vector ConstraintFrame::dct_lambda_action(const Vector& lambda, const Vector& alpha) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(layout_.count()) * dim_);
  for (std::size_t n = 0; n < terms_.size(); ++n) {
    const auto& t = terms_[n];
    if (t.deps.empty() || lambda[t.row] == 0.0) continue;
    Vector a(static_cast<Eigen::Index>(t.deps.size()) * dim_);
    for (std::size_t k = 0; k < t.deps.size(); ++k) a.segment(k * dim_, dim_) = alpha.segment(t.deps[k] * dim_, dim_);
    const int s = term_slot_[n];
    out.segment(s * dim_, dim_) += lambda[t.row] * t.jacobian * a;
  }
  return out;
}

Vector ConstraintFrame::apply_c(const Vector& v) const {
  Vector out = Vector::Zero(rows_);
  for (std::size_t n = 0; n < terms_.size(); ++n)
    out[terms_[n].row] += terms_[n].weight.dot(v.segment(term_slot_[n] * dim_, dim_));
  return out;
}

Vector ConstraintFrame::apply_ct(const Vector& lambda) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(layout_.count()) * dim_);
  for (std::size_t n = 0; n < terms_.size(); ++n)
    out.segment(term_slot_[n] * dim_, dim_) += lambda[terms_[n].row] * terms_[n].weight;
  return out;
}

Matrix ConstraintFrame::gram() const {
  // Rows are sparse in the slots, so sum kernel entries over pairs of terms.
  const std::size_t t = terms_.size();
  Matrix m = Matrix::Zero(rows_, rows_);
  const Matrix& k = kernel_.values();
  for (std::size_t a = 0; a < t; ++a) {
    const auto& ta = terms_[a];
    for (std::size_t b = a; b < t; ++b) {
      const auto& tb = terms_[b];
      const double kab = k(term_slot_[a], term_slot_[b]);
      if (kab == 0.0) continue;
      const double v = kab * ta.weight.dot(tb.weight);
      m(ta.row, tb.row) += v;
      if (a != b) m(tb.row, ta.row) += v;
    }
  }
  return m;
}

MultiplierSolve solve_lambda(const ConstraintFrame& frame, const Vector& slot_momentum,
                             const RegularizationPolicy& policy) {
  MultiplierSolve out;
  const int k = frame.rows();
  if (k == 0) {
    out.lambda = Vector(0);
    return out;
  }
  const Matrix m = frame.gram();
  const Vector b = frame.apply_c(frame.kernel().apply(slot_momentum));
  const double scale = m.trace() / k;

  std::vector<double> ladder;
  if (policy.fixed) {
    ladder = {policy.epsilon};
  } else {
    ladder = {0.0, 1e-12 * scale, 1e-10 * scale, 1e-8 * scale};
  }
  double condition = std::numeric_limits<double>::infinity();
  for (double eps : ladder) {
    Matrix a = m;
    a.diagonal().array() += eps;
    Eigen::LLT<Matrix> llt(a);
    if (llt.info() != Eigen::Success) continue;
    const double rc = llt.rcond();
    condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    if (!policy.fixed && rc < 1e-12) continue;
    out.lambda = llt.solve(b);
    out.residual = (a * out.lambda - b).norm();
    out.epsilon = eps;
    out.condition = condition;
    if (!out.lambda.allFinite()) break;
    return out;
  }
  throw SingularConstraint("constraint Gram matrix C K C^T could not be factored", condition);
}

Vector project_momentum(const ConstraintFrame& frame, const Vector& slot_momentum,
                        const RegularizationPolicy& policy) {
  if (frame.rows() == 0) return slot_momentum;
  const MultiplierSolve s = solve_lambda(frame, slot_momentum, policy);
  return slot_momentum - frame.apply_ct(s.lambda);
}

}  // namespace lddmm
