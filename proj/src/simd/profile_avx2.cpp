#include <immintrin.h>

#include <cmath>

#include "lddmm/simd.hpp"

namespace lddmm::simd::detail {
namespace {

// exp(x) for x <= 0 (Cephes rational approximation, ~1.5 ulp). Arguments
// below -708 flush to zero, where the scalar path would return subnormals.
inline __m256d exp_nonpositive(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125E-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212E-6);
  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878E-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300E-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910E-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042E-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192E-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766E-1);
  const __m256d q3 = _mm256_set1_pd(2.00000000000000000009E0);
  const __m256d lower = _mm256_set1_pd(-708.0);

  const __m256d underflow = _mm256_cmp_pd(x, lower, _CMP_LT_OQ);
  x = _mm256_max_pd(x, lower);

  const __m256d n = _mm256_floor_pd(_mm256_fmadd_pd(x, log2e, _mm256_set1_pd(0.5)));
  __m256d r = _mm256_fnmadd_pd(n, c1, x);
  r = _mm256_fnmadd_pd(n, c2, r);
  const __m256d rr = _mm256_mul_pd(r, r);

  __m256d p = _mm256_fmadd_pd(p0, rr, p1);
  p = _mm256_fmadd_pd(p, rr, p2);
  p = _mm256_mul_pd(p, r);
  __m256d q = _mm256_fmadd_pd(q0, rr, q1);
  q = _mm256_fmadd_pd(q, rr, q2);
  q = _mm256_fmadd_pd(q, rr, q3);

  __m256d y = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  y = _mm256_fmadd_pd(_mm256_set1_pd(2.0), y, _mm256_set1_pd(1.0));

  // 2^n through the exponent field; n is integral and in [-1022, 0].
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  __m256i bits = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                  _mm256_castpd_si256(magic));
  bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)), 52);
  y = _mm256_mul_pd(y, _mm256_castsi256_pd(bits));
  return _mm256_andnot_pd(underflow, y);
}

}  // namespace

void pair_profile_avx2(const PairRequest& req) {
  const double inv_sigma = 1.0 / req.sigma;
  const double inv_sigma2 = inv_sigma * inv_sigma;
  const __m256d vinv_sigma = _mm256_set1_pd(inv_sigma);
  const __m256d vinv_sigma2 = _mm256_set1_pd(inv_sigma2);
  const __m256d zero = _mm256_setzero_pd();

  std::size_t j = 0;
  for (; j + 4 <= req.count; j += 4) {
    __m256d r2 = zero;
    for (int c = 0; c < req.dim; ++c) {
      const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(req.target[c]),
                                         _mm256_loadu_pd(req.sources + c * req.stride + j));
      r2 = _mm256_add_pd(r2, _mm256_mul_pd(diff, diff));
    }
    __m256d k;
    __m256d s;
    if (req.profile == RadialProfile::Gaussian) {
      k = exp_nonpositive(_mm256_sub_pd(zero, _mm256_mul_pd(r2, vinv_sigma2)));
      s = _mm256_mul_pd(_mm256_set1_pd(-2.0 * inv_sigma2), k);
    } else {
      const __m256d t = _mm256_mul_pd(_mm256_sqrt_pd(r2), vinv_sigma);
      const __m256d e = exp_nonpositive(_mm256_sub_pd(zero, t));
      __m256d poly = _mm256_fmadd_pd(t, _mm256_set1_pd(1.0 / 15.0), _mm256_set1_pd(0.4));
      poly = _mm256_fmadd_pd(t, poly, _mm256_set1_pd(1.0));
      poly = _mm256_fmadd_pd(t, poly, _mm256_set1_pd(1.0));
      k = _mm256_mul_pd(poly, e);
      __m256d dpoly = _mm256_fmadd_pd(t, _mm256_add_pd(_mm256_set1_pd(3.0), t), _mm256_set1_pd(3.0));
      s = _mm256_mul_pd(_mm256_mul_pd(dpoly, _mm256_set1_pd(-1.0 / 15.0)),
                        _mm256_mul_pd(vinv_sigma2, e));
    }
    _mm256_storeu_pd(req.value + j, k);
    if (req.slope) _mm256_storeu_pd(req.slope + j, s);
  }

  if (j < req.count) {
    PairRequest tail = req;
    tail.sources = req.sources + j;
    tail.count = req.count - j;
    tail.value = req.value + j;
    tail.slope = req.slope ? req.slope + j : nullptr;
    pair_profile_scalar(tail);
  }
}

}  // namespace lddmm::simd::detail
