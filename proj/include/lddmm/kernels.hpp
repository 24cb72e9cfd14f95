#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lddmm/landmarks.hpp"

namespace lddmm {

enum class KernelFamily {
  Gaussian,  ///< gamma(t) = exp(-t^2)
  Cubic,     ///< gamma(t) = (1 + t + 2t^2/5 + t^3/15) exp(-t)
};

/// Radial scalar kernel K(x, y) = gamma(|x - y| / sigma) Id.
struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double sigma = 1.0;

  void validate() const;
  bool operator==(const KernelSpec&) const = default;
};

std::string_view family_name(KernelFamily family) noexcept;
KernelFamily parse_family(std::string_view name);

double radial_profile(KernelFamily family, double t);
double radial_profile_derivative(KernelFamily family, double t);

/// d x d matrix K(x, y).
Matrix eval_kernel(const KernelSpec& spec, const Vector& x, const Vector& y);

/// Kernel values and slopes between points of a labelled cloud.
///
/// Points with different labels do not interact (their entries are zero), so a
/// cloud holding several fields gives the block-diagonal operator directly.
/// Slopes satisfy grad_x k(x, y) = slope * (x - y). Vectors passed to the
/// member functions are point-major with `dim` coordinates per point.
class LabeledKernel {
 public:
  LabeledKernel(std::span<const KernelSpec> specs, int dim, const Vector& positions,
                std::span<const int> labels);

  int dim() const noexcept { return dim_; }
  int count() const noexcept { return static_cast<int>(values_.rows()); }
  const Matrix& values() const noexcept { return values_; }
  const Matrix& slopes() const noexcept { return slopes_; }

  /// (K (x) Id) m
  Vector apply(const Vector& m) const;
  /// Gradient with respect to the point positions of a^T K b.
  Vector quad_grad(const Vector& a, const Vector& b) const;
  /// Directional derivative of x -> K_x m along alpha.
  Vector dir_deriv(const Vector& m, const Vector& alpha) const;

 private:
  int dim_;
  Matrix points_;  // count x dim
  Matrix values_;
  Matrix slopes_;
};

/// K_q for a single kernel: n x n scalar blocks, each standing for block * Id_d.
class KernelMatrix {
 public:
  KernelMatrix(int dim, Matrix scalar) : dim_(dim), scalar_(std::move(scalar)) {}

  int dim() const noexcept { return dim_; }
  int count() const noexcept { return static_cast<int>(scalar_.rows()); }
  const Matrix& scalar() const noexcept { return scalar_; }
  double block(int i, int j) const { return scalar_(i, j); }
  /// Explicit nd x nd matrix.
  Matrix dense() const;

 private:
  int dim_;
  Matrix scalar_;
};

KernelMatrix assemble_kq(const KernelSpec& spec, const LandmarkState& q);
/// grad_q (a^T K_q b)
Vector grad_quadratic(const KernelSpec& spec, const LandmarkState& q, const Vector& a, const Vector& b);
/// d/dq (K_q p) . alpha
Vector dir_deriv_kq(const KernelSpec& spec, const LandmarkState& q, const Vector& p, const Vector& alpha);
/// d/dq (grad_q p^T K_q p) . alpha, by central differences of grad_quadratic.
Vector hess_quadratic_action(const KernelSpec& spec, const LandmarkState& q, const Vector& p,
                             const Vector& alpha);

/// Kernel values between target points (rows) and source points (columns).
Matrix cross_kernel(const KernelSpec& spec, int dim, const Vector& targets, const Vector& sources);

/// One deformation field: a kernel shared by the landmarks of the listed groups.
struct FieldSpec {
  std::string name;
  KernelSpec kernel;
  std::vector<std::string> groups;

  bool operator==(const FieldSpec&) const = default;
};

/// Field specs resolved against the groups of a landmark structure.
class FieldMap {
 public:
  FieldMap() = default;
  FieldMap(std::vector<FieldSpec> fields, const LandmarkState& structure);

  /// Single field covering every group.
  static FieldMap single(const KernelSpec& spec, const LandmarkState& structure);

  int size() const noexcept { return static_cast<int>(fields_.size()); }
  const FieldSpec& field(int f) const { return fields_.at(f); }
  const std::vector<FieldSpec>& fields() const noexcept { return fields_; }
  std::span<const KernelSpec> kernels() const noexcept { return kernels_; }
  std::span<const int> labels() const noexcept { return labels_; }
  int field_of_point(int i) const { return labels_.at(i); }
  int field_of_group(std::string_view group) const;
  int field_index(std::string_view name) const;
  double min_sigma() const;

 private:
  std::vector<FieldSpec> fields_;
  std::vector<KernelSpec> kernels_;
  std::vector<int> labels_;
  std::vector<std::pair<std::string, int>> group_fields_;
};

/// Landmark-level kernel of a state under a field map.
LabeledKernel landmark_kernel(const FieldMap& fields, int dim, const Vector& q);

}  // namespace lddmm
