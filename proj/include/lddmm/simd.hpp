#pragma once

#include <cstddef>
#include <string_view>

// Runtime-dispatched inner loop shared by every kernel evaluation: for one
// target point and a block of source points, compute the radial profile value
// k(|y - x|) and its slope s with grad_y k = s * (y - x).

namespace lddmm::simd {

enum class RadialProfile {
  Gaussian,  // exp(-t^2)
  Cubic,     // (1 + t + 2t^2/5 + t^3/15) exp(-t)
};

enum class Backend { Scalar, Avx2 };

struct PairRequest {
  RadialProfile profile = RadialProfile::Gaussian;
  double sigma = 1.0;
  int dim = 2;
  const double* target = nullptr;   // dim coordinates
  const double* sources = nullptr;  // structure of arrays: coordinate c of source j at [c*stride + j]
  std::size_t stride = 0;
  std::size_t count = 0;
  double* value = nullptr;  // count outputs
  double* slope = nullptr;  // count outputs, may be null
};

void pair_profile(const PairRequest& req);

Backend active_backend() noexcept;
bool backend_available(Backend b) noexcept;
/// Throws lddmm::InvalidInput if the backend is not available on this CPU/build.
void set_backend(Backend b);
std::string_view backend_name(Backend b) noexcept;

namespace detail {
void pair_profile_scalar(const PairRequest& req);
#if defined(LDDMM_HAVE_AVX2)
void pair_profile_avx2(const PairRequest& req);
#endif
}  // namespace detail

}  // namespace lddmm::simd
