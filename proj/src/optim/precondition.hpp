#pragma once

#include "lddmm/kernels.hpp"

namespace lddmm::detail {

// Solves (K + shift * mean(diag K) I) x = g for a point-major vector g.
inline Vector kernel_solve(const LabeledKernel& k, const Vector& g, double shift) {
  const int n = k.count();
  const int d = k.dim();
  Matrix a = k.values();
  a.diagonal().array() += shift * a.diagonal().mean();
  const Eigen::LLT<Matrix> llt(a);
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const Eigen::Map<const RowMatrix> rhs(g.data(), n, d);
  RowMatrix x = llt.solve(Matrix(rhs));
  return Eigen::Map<const Vector>(x.data(), x.size());
}

}  // namespace lddmm::detail
