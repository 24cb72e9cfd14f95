#include <atomic>
#include <cstdlib>
#include <string>

#include "lddmm/error.hpp"
#include "lddmm/simd.hpp"

namespace lddmm::simd {
namespace {

bool cpu_has_avx2() noexcept {
#if defined(LDDMM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend initial_backend() noexcept {
  if (const char* env = std::getenv("LDDMM_SIMD")) {
    if (std::string(env) == "scalar") return Backend::Scalar;
  }
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
}

std::atomic<Backend>& current() noexcept {
  static std::atomic<Backend> backend{initial_backend()};
  return backend;
}

}  // namespace

void pair_profile(const PairRequest& req) {
#if defined(LDDMM_HAVE_AVX2)
  if (current().load(std::memory_order_relaxed) == Backend::Avx2) {
    detail::pair_profile_avx2(req);
    return;
  }
#endif
  detail::pair_profile_scalar(req);
}

Backend active_backend() noexcept { return current().load(); }

bool backend_available(Backend b) noexcept {
  return b == Backend::Scalar || (b == Backend::Avx2 && cpu_has_avx2());
}

void set_backend(Backend b) {
  if (!backend_available(b))
    throw InvalidInput("SIMD backend '" + std::string(backend_name(b)) + "' is not available");
  current().store(b);
}

std::string_view backend_name(Backend b) noexcept {
  switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
  }
  return "unknown";
}

}  // namespace lddmm::simd
