#pragma once

#include "lddmm/constraints.hpp"
#include "lddmm/kernels.hpp"
#include "lddmm/landmarks.hpp"

namespace lddmm {

/// Landmark structure, deformation fields and constraints: everything that
/// defines the dynamics, independent of the matching data.
class ShapeModel {
 public:
  ShapeModel(LandmarkState structure, FieldMap fields, ConstraintSet constraints = {},
             RegularizationPolicy reg = {});
  /// One kernel for every landmark.
  static ShapeModel single(const KernelSpec& spec, LandmarkState structure, ConstraintSet constraints = {});

  int dim() const noexcept { return structure_.dim(); }
  int size() const noexcept { return structure_.size(); }
  const LandmarkState& structure() const noexcept { return structure_; }
  const FieldMap& fields() const noexcept { return fields_; }
  const ConstraintSet& constraints() const noexcept { return constraints_; }
  const SlotLayout& layout() const noexcept { return layout_; }
  const RegularizationPolicy& regularization() const noexcept { return reg_; }
  int constraint_rows() const noexcept { return rows_; }
  bool constrained() const noexcept { return rows_ > 0; }

  LandmarkState state(const Vector& q) const { return structure_.with_coords(q); }
  ConstraintFrame frame(const Vector& q) const;
  /// Kernel between landmarks only (block diagonal over fields).
  LabeledKernel kernel(const Vector& q) const;

 private:
  LandmarkState structure_;
  FieldMap fields_;
  ConstraintSet constraints_;
  RegularizationPolicy reg_;
  SlotLayout layout_;
  int rows_ = 0;
};

/// C_q in slot coordinates (k x nd when no constraint looks across fields).
Matrix constraint_matrix(const ShapeModel& model, const Vector& q);
/// d/dq (C_q^T lambda) . alpha in slot coordinates.
Vector dct_lambda_action(const ShapeModel& model, const Vector& q, const Vector& lambda, const Vector& alpha);

}  // namespace lddmm
