#pragma once

// Independent reference computations for the tests: brute-force assemblies,
// finite differences and seeded random instances. Nothing here calls the
// routine it is used to check.

#include <cmath>
#include <functional>
#include <random>

#include "lddmm/kernels.hpp"
#include "lddmm/landmarks.hpp"

namespace oracle {

using lddmm::Matrix;
using lddmm::Vector;

inline double rel_err(const Vector& a, const Vector& b) {
  const double scale = std::max(a.norm(), b.norm());
  return scale == 0.0 ? 0.0 : (a - b).norm() / scale;
}

inline double rel_err(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

/// Central differences of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector a = x, b = x;
    a[i] += h;
    b[i] -= h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
  }
  return g;
}

/// Central difference of a vector map along a direction.
inline Vector fd_directional(const std::function<Vector(const Vector&)>& f, const Vector& x, const Vector& dir,
                             double h) {
  return (f(x + h * dir) - f(x - h * dir)) / (2.0 * h);
}

/// Profiles written out from their closed forms.
inline double gaussian(double t) { return std::exp(-t * t); }
inline double cubic(double t) { return (1.0 + t + 0.4 * t * t + t * t * t / 15.0) * std::exp(-t); }

inline double profile(const lddmm::KernelSpec& s, double r) {
  const double t = r / s.sigma;
  return s.family == lddmm::KernelFamily::Gaussian ? gaussian(t) : cubic(t);
}

/// Full nd x nd kernel matrix, one block at a time.
inline Matrix dense_kernel(const lddmm::KernelSpec& s, int d, const Vector& q) {
  const Eigen::Index n = q.size() / d;
  Matrix k = Matrix::Zero(n * d, n * d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = profile(s, (q.segment(i * d, d) - q.segment(j * d, d)).norm());
      for (int c = 0; c < d; ++c) k(i * d + c, j * d + c) = v;
    }
  return k;
}

/// a^T K_q b from the brute-force assembly.
inline double quadratic(const lddmm::KernelSpec& s, int d, const Vector& q, const Vector& a, const Vector& b) {
  return a.dot(dense_kernel(s, d, q) * b);
}

/// Shoelace area written with explicit x/y sums.
inline double shoelace(const Vector& xy) {
  const Eigen::Index n = xy.size() / 2;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j = (i + 1) % n;
    acc += xy[2 * i] * xy[2 * j + 1] - xy[2 * j] * xy[2 * i + 1];
  }
  return 0.5 * acc;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double normal() { return normal_(gen_); }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  Vector normal_vector(Eigen::Index n, double scale = 1.0) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * normal();
    return v;
  }
  Vector uniform_vector(Eigen::Index n, double lo, double hi) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }

 private:
  std::mt19937_64 gen_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace oracle
