#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "lddmm/kernels.hpp"
#include "lddmm/landmarks.hpp"

namespace lddmm {

/// One evaluation inside a constraint row: row += weight . v_field(x_point).
///
/// `jacobian` is the derivative of `weight` with respect to the coordinates of
/// the landmarks listed in `deps` (d x d*|deps|); it is empty when the weight
/// does not depend on the state.
struct EvalTerm {
  int row = 0;
  int field = 0;
  int point = 0;
  Vector weight;
  std::vector<int> deps;
  Matrix jacobian;
};

/// A block of kinetic constraint rows. Rows are linear in the velocity fields
/// evaluated at landmark positions; the coefficients may depend on the state.
class ConstraintProvider {
 public:
  virtual ~ConstraintProvider() = default;

  virtual std::string name() const = 0;
  virtual int rows(const LandmarkState& structure) const = 0;
  /// Throws if the provider cannot act on this structure and field map.
  virtual void validate(const LandmarkState& structure, const FieldMap& fields) const = 0;
  /// Terms with rows numbered from 0 within the block.
  virtual std::vector<EvalTerm> terms(const LandmarkState& q, const FieldMap& fields) const = 0;
};

using ProviderPtr = std::shared_ptr<const ConstraintProvider>;

/// d/dt Vol(group) = 0, i.e. dVol_q . v(q) = 0 (2D closed polygon).
ProviderPtr volume_constraint(std::string group);
/// v(x_a) - v(x_b) = 0 for each pair, each side evaluated by its own field.
ProviderPtr stitched_constraint(std::vector<std::pair<int, int>> pairs);

struct SlidingSegment {
  int minus = 0;
  int plus = 0;
};
/// For each segment [z-, z+] of a background curve: nu . (v_shape(l) - v_own(l)) = 0,
/// where v(l) averages the field over both endpoints and nu is the unit normal.
ProviderPtr sliding_constraint(std::string shape_field, std::vector<SlidingSegment> segments);
/// Closed-curve segments (i, i+1 mod m) over the landmarks of a group.
std::vector<SlidingSegment> closed_segments(const LandmarkState& structure, const std::string& group);
/// Fixed rows C acting on the landmark velocities: C q_dot = 0. C is k x nd.
ProviderPtr linear_kinetic_constraint(Matrix rows, std::string label = "linear");

/// Ordered list of providers.
class ConstraintSet {
 public:
  ConstraintSet() = default;
  explicit ConstraintSet(std::vector<ProviderPtr> providers) : providers_(std::move(providers)) {}

  void add(ProviderPtr p) { providers_.push_back(std::move(p)); }
  bool empty() const noexcept { return providers_.empty(); }
  const std::vector<ProviderPtr>& providers() const noexcept { return providers_; }
  int rows(const LandmarkState& structure) const;
  void validate(const LandmarkState& structure, const FieldMap& fields) const;
  /// All terms with rows offset by block.
  std::vector<EvalTerm> terms(const LandmarkState& q, const FieldMap& fields) const;

 private:
  std::vector<ProviderPtr> providers_;
};

/// Points at which the fields are evaluated. Slots [0, n) are the landmarks
/// under their own field; further slots are landmarks seen by another field
/// (the sliding constraint evaluates the shape field on background points).
class SlotLayout {
 public:
  SlotLayout() = default;
  SlotLayout(const LandmarkState& structure, const FieldMap& fields, const ConstraintSet& cs);

  int own() const noexcept { return own_; }
  int count() const noexcept { return static_cast<int>(point_.size()); }
  int point(int s) const { return point_.at(s); }
  int field(int s) const { return field_.at(s); }
  const std::vector<int>& fields() const noexcept { return field_; }
  const std::vector<int>& points() const noexcept { return point_; }
  int slot_of(int field, int point) const;

 private:
  int own_ = 0;
  std::vector<int> point_;
  std::vector<int> field_;
};

/// Everything needed to apply C_q and the augmented kernel at one state.
class ConstraintFrame {
 public:
  ConstraintFrame(const SlotLayout& layout, const FieldMap& fields, const ConstraintSet& cs,
                  const LandmarkState& q);

  int dim() const noexcept { return dim_; }
  int rows() const noexcept { return rows_; }
  const SlotLayout& layout() const noexcept { return layout_; }
  const LabeledKernel& kernel() const noexcept { return kernel_; }
  /// k x (slots * d)
  /// Dense C, assembled on request.
  Matrix matrix() const;
  const std::vector<EvalTerm>& terms() const noexcept { return terms_; }

  /// Landmark momentum (nd) to slot momentum (zero on foreign slots).
  Vector embed(const Vector& p) const;
  /// Slot vector to its landmark slots.
  Vector restrict(const Vector& v) const;
  /// Sums a slot-position gradient onto the landmarks the slots sit on.
  Vector scatter(const Vector& g) const;
  /// sum_t lambda_row J_t^T v_slot(t), scattered to landmark coordinates.
  Vector weight_gradient(const Vector& lambda, const Vector& v) const;
  /// d/dq (C_q^T lambda) . alpha in slot space.
  Vector dct_lambda_action(const Vector& lambda, const Vector& alpha) const;
  /// C v for a slot vector v.
  Vector apply_c(const Vector& v) const;
  /// C^T lambda as a slot vector.
  Vector apply_ct(const Vector& lambda) const;
  /// C K_aug C^T
  Matrix gram() const;

 private:
  SlotLayout layout_;
  int dim_;
  std::vector<EvalTerm> terms_;
  std::vector<int> term_slot_;
  LabeledKernel kernel_;
  int rows_ = 0;
};

/// How the Gram matrix C K C^T is regularized before factoring.
struct RegularizationPolicy {
  bool fixed = false;    // use exactly `epsilon`, no escalation
  double epsilon = 0.0;  // used when fixed
};

struct MultiplierSolve {
  Vector lambda;
  double residual = 0.0;
  double epsilon = 0.0;
  double condition = 1.0;
};

/// Solves (C K C^T + eps I) lambda = C K P0 for a slot momentum P0.
MultiplierSolve solve_lambda(const ConstraintFrame& frame, const Vector& slot_momentum,
                             const RegularizationPolicy& policy = {});
/// P0 - C^T lambda, in slot space.
Vector project_momentum(const ConstraintFrame& frame, const Vector& slot_momentum,
                        const RegularizationPolicy& policy = {});

}  // namespace lddmm
