#include "lddmm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lddmm/error.hpp"
#include "lddmm/simd.hpp"

namespace lddmm {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

simd::RadialProfile to_profile(KernelFamily f) {
  return f == KernelFamily::Gaussian ? simd::RadialProfile::Gaussian : simd::RadialProfile::Cubic;
}

Eigen::Map<const RowMatrix> as_points(const Vector& v, int dim) {
  return {v.data(), static_cast<Eigen::Index>(v.size() / dim), dim};
}

Vector flatten(const RowMatrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

void check_compatible(const LandmarkState& q, const Vector& v, const char* what) {
  if (v.size() != q.coords().size())
    throw InvalidInput(std::string(what) + " has " + std::to_string(v.size()) +
                       " entries, expected " + std::to_string(q.coords().size()));
}

LabeledKernel single_kernel(const KernelSpec& spec, const LandmarkState& q) {
  spec.validate();
  std::vector<int> labels(q.size(), 0);
  return LabeledKernel(std::span<const KernelSpec>(&spec, 1), q.dim(), q.coords(), labels);
}

}  // namespace

void KernelSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw InvalidInput("kernel sigma must be a positive finite length scale");
}

std::string_view family_name(KernelFamily family) noexcept {
  return family == KernelFamily::Gaussian ? "gaussian" : "cubic";
}

KernelFamily parse_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "cubic") return KernelFamily::Cubic;
  throw InvalidInput("unknown kernel family '" + std::string(name) + "'");
}

double radial_profile(KernelFamily family, double t) {
  if (family == KernelFamily::Gaussian) return std::exp(-t * t);
  return (1.0 + t + 0.4 * t * t + t * t * t / 15.0) * std::exp(-t);
}

double radial_profile_derivative(KernelFamily family, double t) {
  if (family == KernelFamily::Gaussian) return -2.0 * t * std::exp(-t * t);
  return -t * (3.0 + 3.0 * t + t * t) / 15.0 * std::exp(-t);
}

Matrix eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& y) {
  spec.validate();
  if (x.size() != y.size() || x.size() == 0) throw InvalidInput("kernel points must share a dimension");
  if (!x.allFinite() || !y.allFinite()) throw InvalidInput("kernel points must be finite");
  const double t = (x - y).norm() / spec.sigma;
  return radial_profile(spec.family, t) * Matrix::Identity(x.size(), x.size());
}

LabeledKernel::LabeledKernel(std::span<const KernelSpec> specs, int dim, const Vector& positions,
                             std::span<const int> labels)
    : dim_(dim) {
  const int n = static_cast<int>(labels.size());
  if (positions.size() != static_cast<Eigen::Index>(n) * dim)
    throw InvalidInput("kernel positions do not match the label count");
  points_ = as_points(positions, dim);
  values_ = Matrix::Zero(n, n);
  slopes_ = Matrix::Zero(n, n);

  std::vector<std::vector<int>> members(specs.size());
  for (int i = 0; i < n; ++i) {
    if (labels[i] < 0 || labels[i] >= static_cast<int>(specs.size()))
      throw InvalidInput("kernel label out of range");
    members[labels[i]].push_back(i);
  }

  std::vector<double> soa, value, slope;
  for (std::size_t f = 0; f < specs.size(); ++f) {
    const auto& idx = members[f];
    const std::size_t m = idx.size();
    if (m == 0) continue;
    soa.assign(m * dim, 0.0);
    for (std::size_t a = 0; a < m; ++a)
      for (int c = 0; c < dim; ++c) soa[c * m + a] = points_(idx[a], c);
    value.resize(m);
    slope.resize(m);

    simd::PairRequest req;
    req.profile = to_profile(specs[f].family);
    req.sigma = specs[f].sigma;
    req.dim = dim;
    req.stride = m;
    std::vector<double> target(dim);
    for (std::size_t a = 0; a < m; ++a) {
      for (int c = 0; c < dim; ++c) target[c] = soa[c * m + a];
      req.target = target.data();
      req.sources = soa.data() + a;
      req.count = m - a;
      req.value = value.data();
      req.slope = slope.data();
      simd::pair_profile(req);
      for (std::size_t b = a; b < m; ++b) {
        const int i = idx[a];
        const int j = idx[b];
        values_(i, j) = values_(j, i) = value[b - a];
        slopes_(i, j) = slopes_(j, i) = slope[b - a];
      }
    }
  }
}

Vector LabeledKernel::apply(const Vector& m) const {
  RowMatrix out = values_ * as_points(m, dim_);
  return flatten(out);
}

Vector LabeledKernel::quad_grad(const Vector& a, const Vector& b) const {
  const auto A = as_points(a, dim_);
  const auto B = as_points(b, dim_);
  const Matrix ab = A * B.transpose();
  const Matrix w = slopes_.cwiseProduct(ab + ab.transpose());
  RowMatrix grad = w.rowwise().sum().asDiagonal() * points_ - w * points_;
  return flatten(grad);
}

Vector LabeledKernel::dir_deriv(const Vector& m, const Vector& alpha) const {
  const auto M = as_points(m, dim_);
  const auto Al = as_points(alpha, dim_);
  const Matrix g = points_ * Al.transpose();  // g(i, j) = x_i . alpha_j
  const Vector diag = g.diagonal();
  const Eigen::Index n = g.rows();
  Matrix d = diag.replicate(1, n) + diag.transpose().replicate(n, 1) - g - g.transpose();
  RowMatrix out = slopes_.cwiseProduct(d) * M;
  return flatten(out);
}

Matrix KernelMatrix::dense() const {
  const Eigen::Index n = scalar_.rows();
  Matrix out = Matrix::Zero(n * dim_, n * dim_);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      for (int c = 0; c < dim_; ++c) out(i * dim_ + c, j * dim_ + c) = scalar_(i, j);
  return out;
}

KernelMatrix assemble_kq(const KernelSpec& spec, const LandmarkState& q) {
  return KernelMatrix(q.dim(), single_kernel(spec, q).values());
}

Vector grad_quadratic(const KernelSpec& spec, const LandmarkState& q, const Vector& a, const Vector& b) {
  check_compatible(q, a, "momentum a");
  check_compatible(q, b, "momentum b");
  return single_kernel(spec, q).quad_grad(a, b);
}

Vector dir_deriv_kq(const KernelSpec& spec, const LandmarkState& q, const Vector& p, const Vector& alpha) {
  check_compatible(q, p, "momentum");
  check_compatible(q, alpha, "direction");
  return single_kernel(spec, q).dir_deriv(p, alpha);
}

Vector hess_quadratic_action(const KernelSpec& spec, const LandmarkState& q, const Vector& p,
                             const Vector& alpha) {
  check_compatible(q, p, "momentum");
  check_compatible(q, alpha, "direction");
  const double scale = max_abs(alpha);
  if (scale == 0.0) return Vector::Zero(q.coords().size());
  const double h = 1e-4 * spec.sigma * (1.0 + max_abs(q.coords())) / scale;
  const LandmarkState plus = q.with_coords(q.coords() + h * alpha);
  const LandmarkState minus = q.with_coords(q.coords() - h * alpha);
  return (grad_quadratic(spec, plus, p, p) - grad_quadratic(spec, minus, p, p)) / (2.0 * h);
}

Matrix cross_kernel(const KernelSpec& spec, int dim, const Vector& targets, const Vector& sources) {
  spec.validate();
  const auto T = as_points(targets, dim);
  const auto S = as_points(sources, dim);
  const std::size_t n = S.rows();
  std::vector<double> soa(n * dim);
  for (std::size_t j = 0; j < n; ++j)
    for (int c = 0; c < dim; ++c) soa[c * n + j] = S(j, c);
  Matrix out(T.rows(), n);
  std::vector<double> row(n), target(dim);
  simd::PairRequest req;
  req.profile = to_profile(spec.family);
  req.sigma = spec.sigma;
  req.dim = dim;
  req.sources = soa.data();
  req.stride = n;
  req.count = n;
  req.value = row.data();
  for (Eigen::Index i = 0; i < T.rows(); ++i) {
    for (int c = 0; c < dim; ++c) target[c] = T(i, c);
    req.target = target.data();
    simd::pair_profile(req);
    for (std::size_t j = 0; j < n; ++j) out(i, j) = row[j];
  }
  return out;
}

FieldMap::FieldMap(std::vector<FieldSpec> fields, const LandmarkState& structure)
    : fields_(std::move(fields)) {
  if (fields_.empty()) throw InvalidInput("at least one deformation field is required");
  labels_.assign(structure.size(), -1);
  for (std::size_t f = 0; f < fields_.size(); ++f) {
    const auto& spec = fields_[f];
    spec.kernel.validate();
    kernels_.push_back(spec.kernel);
    for (std::size_t g = 0; g < f; ++g)
      if (fields_[g].name == spec.name) throw InvalidInput("duplicate field name '" + spec.name + "'");
    if (spec.groups.empty()) throw InvalidInput("field '" + spec.name + "' lists no groups");
    for (const auto& gname : spec.groups) {
      if (!structure.has_group(gname))
        throw InvalidInput("field '" + spec.name + "' references unknown group '" + gname + "'");
      for (int i : structure.group(gname).indices) {
        if (labels_[i] != -1)
          throw InvalidInput("group '" + gname + "' is assigned to more than one field");
        labels_[i] = static_cast<int>(f);
      }
      group_fields_.emplace_back(gname, static_cast<int>(f));
    }
  }
  for (const auto& g : structure.groups())
    if (labels_[g.indices.front()] == -1)
      throw InvalidInput("group '" + g.name + "' is not assigned to any field");
}

FieldMap FieldMap::single(const KernelSpec& spec, const LandmarkState& structure) {
  FieldSpec f{"field", spec, {}};
  for (const auto& g : structure.groups()) f.groups.push_back(g.name);
  return FieldMap({f}, structure);
}

int FieldMap::field_of_group(std::string_view group) const {
  for (const auto& [name, f] : group_fields_)
    if (name == group) return f;
  throw InvalidInput("group '" + std::string(group) + "' has no field");
}

int FieldMap::field_index(std::string_view name) const {
  for (std::size_t f = 0; f < fields_.size(); ++f)
    if (fields_[f].name == name) return static_cast<int>(f);
  throw InvalidInput("unknown field '" + std::string(name) + "'");
}

double FieldMap::min_sigma() const {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& k : kernels_) s = std::min(s, k.sigma);
  return s;
}

LabeledKernel landmark_kernel(const FieldMap& fields, int dim, const Vector& q) {
  return LabeledKernel(fields.kernels(), dim, q, fields.labels());
}

}  // namespace lddmm
