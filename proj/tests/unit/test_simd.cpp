#include <doctest.h>

#include <vector>

#include "lddmm/kernels.hpp"
#include "lddmm/simd.hpp"
#include "oracles.hpp"

using namespace lddmm;

namespace {

struct BackendGuard {
  simd::Backend saved = simd::active_backend();
  ~BackendGuard() { simd::set_backend(saved); }
};

struct Output {
  std::vector<double> value, slope;
};

Output run(simd::Backend b, simd::RadialProfile profile, double sigma, int dim, const std::vector<double>& target,
           const std::vector<double>& soa, std::size_t count) {
  simd::set_backend(b);
  Output out{std::vector<double>(count), std::vector<double>(count)};
  simd::PairRequest req;
  req.profile = profile;
  req.sigma = sigma;
  req.dim = dim;
  req.target = target.data();
  req.sources = soa.data();
  req.stride = count;
  req.count = count;
  req.value = out.value.data();
  req.slope = out.slope.data();
  simd::pair_profile(req);
  return out;
}

}  // namespace

TEST_CASE("scalar backend is always available") {
  CHECK(simd::backend_available(simd::Backend::Scalar));
  CHECK(simd::backend_name(simd::Backend::Scalar) == "scalar");
}

TEST_CASE("scalar profile matches the closed forms") {
  BackendGuard guard;
  oracle::Rng rng(11);
  for (auto profile : {simd::RadialProfile::Gaussian, simd::RadialProfile::Cubic}) {
    const std::size_t count = 37;
    std::vector<double> target{0.3, -0.2};
    std::vector<double> soa(2 * count);
    for (auto& v : soa) v = rng.uniform(-3.0, 3.0);
    const Output o = run(simd::Backend::Scalar, profile, 0.8, 2, target, soa, count);
    const KernelSpec spec{profile == simd::RadialProfile::Gaussian ? KernelFamily::Gaussian : KernelFamily::Cubic,
                          0.8};
    for (std::size_t j = 0; j < count; ++j) {
      const double dx = soa[j] - target[0];
      const double dy = soa[count + j] - target[1];
      const double r = std::hypot(dx, dy);
      CHECK(o.value[j] == doctest::Approx(oracle::profile(spec, r)).epsilon(1e-14));
    }
  }
}

TEST_CASE("avx2 backend agrees with the scalar reference") {
  if (!simd::backend_available(simd::Backend::Avx2)) {
    MESSAGE("avx2 not available on this build or CPU; skipping");
    return;
  }
  BackendGuard guard;
  oracle::Rng rng(7);
  for (auto profile : {simd::RadialProfile::Gaussian, simd::RadialProfile::Cubic}) {
    for (int dim : {1, 2, 3}) {
      // Odd counts exercise the remainder lanes; the wide range reaches the underflow branch.
      for (std::size_t count : {1u, 3u, 4u, 5u, 17u, 64u, 131u}) {
        std::vector<double> target(dim);
        for (auto& v : target) v = rng.uniform(-1.0, 1.0);
        std::vector<double> soa(dim * count);
        for (auto& v : soa) v = rng.uniform(-40.0, 40.0) * (rng.uniform(0, 1) < 0.5 ? 0.05 : 1.0);
        for (double sigma : {0.1, 1.0, 3.0}) {
          const Output s = run(simd::Backend::Scalar, profile, sigma, dim, target, soa, count);
          const Output v = run(simd::Backend::Avx2, profile, sigma, dim, target, soa, count);
          for (std::size_t j = 0; j < count; ++j) {
            // exp(-x) carries a relative conditioning of x, so far tails get a looser bound.
            const double rel = s.value[j] > 0.0 ? 1e-15 * (10.0 + std::abs(std::log(s.value[j]))) : 0.0;
            CHECK(std::abs(s.value[j] - v.value[j]) <= rel * std::abs(s.value[j]) + 1e-300);
            CHECK(std::abs(s.slope[j] - v.slope[j]) <= rel * std::abs(s.slope[j]) + 1e-300);
          }
        }
      }
    }
  }
}

TEST_CASE("kernel assembly is the same on both backends") {
  if (!simd::backend_available(simd::Backend::Avx2)) return;
  BackendGuard guard;
  oracle::Rng rng(3);
  const Vector q = rng.uniform_vector(2 * 29, -2.0, 2.0);
  std::vector<int> labels(29);
  for (int i = 0; i < 29; ++i) labels[i] = i % 2;
  const std::vector<KernelSpec> specs{{KernelFamily::Gaussian, 0.7}, {KernelFamily::Cubic, 0.4}};
  simd::set_backend(simd::Backend::Scalar);
  const LabeledKernel a(specs, 2, q, labels);
  simd::set_backend(simd::Backend::Avx2);
  const LabeledKernel b(specs, 2, q, labels);
  CHECK((a.values() - b.values()).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((a.slopes() - b.slopes()).cwiseAbs().maxCoeff() <= 1e-13 * a.slopes().cwiseAbs().maxCoeff());
  CHECK(b.values() == b.values().transpose());
}

TEST_CASE("unavailable backends are refused") {
  if (simd::backend_available(simd::Backend::Avx2)) return;
  CHECK_THROWS(simd::set_backend(simd::Backend::Avx2));
}
