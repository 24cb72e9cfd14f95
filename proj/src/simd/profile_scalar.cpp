#include <cmath>

#include "lddmm/simd.hpp"

namespace lddmm::simd::detail {

void pair_profile_scalar(const PairRequest& req) {
  const double inv_sigma = 1.0 / req.sigma;
  const double inv_sigma2 = inv_sigma * inv_sigma;
  for (std::size_t j = 0; j < req.count; ++j) {
    double r2 = 0.0;
    for (int c = 0; c < req.dim; ++c) {
      const double diff = req.target[c] - req.sources[c * req.stride + j];
      r2 += diff * diff;
    }
    double k = 0.0;
    double s = 0.0;
    if (req.profile == RadialProfile::Gaussian) {
      k = std::exp(-r2 * inv_sigma2);
      s = -2.0 * inv_sigma2 * k;
    } else {
      const double t = std::sqrt(r2) * inv_sigma;
      const double e = std::exp(-t);
      k = (1.0 + t * (1.0 + t * (0.4 + t * (1.0 / 15.0)))) * e;
      s = -(3.0 + t * (3.0 + t)) * (1.0 / 15.0) * inv_sigma2 * e;
    }
    req.value[j] = k;
    if (req.slope) req.slope[j] = s;
  }
}

}  // namespace lddmm::simd::detail
