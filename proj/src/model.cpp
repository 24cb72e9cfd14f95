#include "lddmm/model.hpp"

#include "lddmm/error.hpp"

namespace lddmm {

ShapeModel::ShapeModel(LandmarkState structure, FieldMap fields, ConstraintSet constraints,
                       RegularizationPolicy reg)
    : structure_(std::move(structure)),
      fields_(std::move(fields)),
      constraints_(std::move(constraints)),
      reg_(reg) {
  if (fields_.labels().size() != static_cast<std::size_t>(structure_.size()))
    throw InvalidInput("field map was built for a different landmark structure");
  constraints_.validate(structure_, fields_);
  layout_ = SlotLayout(structure_, fields_, constraints_);
  rows_ = constraints_.rows(structure_);
}

ShapeModel ShapeModel::single(const KernelSpec& spec, LandmarkState structure, ConstraintSet constraints) {
  FieldMap fields = FieldMap::single(spec, structure);
  return ShapeModel(std::move(structure), std::move(fields), std::move(constraints));
}

ConstraintFrame ShapeModel::frame(const Vector& q) const {
  return ConstraintFrame(layout_, fields_, constraints_, state(q));
}

LabeledKernel ShapeModel::kernel(const Vector& q) const {
  if (q.size() != structure_.coords().size()) throw InvalidInput("state size does not match the model");
  return landmark_kernel(fields_, dim(), q);
}

Matrix constraint_matrix(const ShapeModel& model, const Vector& q) { return model.frame(q).matrix(); }

Vector dct_lambda_action(const ShapeModel& model, const Vector& q, const Vector& lambda, const Vector& alpha) {
  const ConstraintFrame f = model.frame(q);
  if (lambda.size() != f.rows()) throw InvalidInput("multiplier size does not match the constraint rows");
  return f.dct_lambda_action(lambda, alpha);
}

}  // namespace lddmm
