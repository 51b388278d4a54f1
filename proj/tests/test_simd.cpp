#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "tvcap/error.hpp"
#include "tvcap/kernels.hpp"
#include "tvcap/simd.hpp"

using namespace tvcap;

namespace {

std::vector<double> noise(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng) * std::pow(10.0, 3.0 * u(rng));
  return v;
}

// Restores the active ISA when a test case ends.
struct IsaGuard {
  simd::Isa saved = simd::active_isa();
  ~IsaGuard() { simd::set_active_isa(saved); }
};

}  // namespace

TEST_CASE("dispatch") {
  CHECK(simd::is_available(simd::Isa::scalar));
  CHECK(simd::to_string(simd::Isa::avx2) == "avx2");
  CHECK(&simd::kernels(simd::Isa::scalar) != nullptr);
  IsaGuard guard;
  simd::set_active_isa(simd::Isa::scalar);
  CHECK(simd::active_isa() == simd::Isa::scalar);
  if (!simd::is_available(simd::Isa::avx2)) {
    CHECK_THROWS_AS(simd::set_active_isa(simd::Isa::avx2), Error);
    CHECK(simd::detected_isa() == simd::Isa::scalar);
  } else {
    CHECK(simd::detected_isa() == simd::Isa::avx2);
  }
}

TEST_CASE("wide kernels match the scalar reference") {
  if (!simd::is_available(simd::Isa::avx2)) {
    MESSAGE("no AVX2 on this CPU, only the scalar kernels are exercised");
    return;
  }
  const simd::KernelTable& ref = simd::kernels(simd::Isa::scalar);
  const simd::KernelTable& wide = simd::kernels(simd::Isa::avx2);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 31u, 64u, 1001u}) {
    const std::vector<double> a = noise(n + 1, 1 + static_cast<unsigned>(n));
    const std::vector<double> b = noise(n + 1, 1000 + static_cast<unsigned>(n));

    // elementwise kernels: bit for bit
    std::vector<double> h1 = b, h2 = b;
    ref.curl_e(h1.data(), a.data(), 0.7, n);
    wide.curl_e(h2.data(), a.data(), 0.7, n);
    CHECK(h1 == h2);

    std::vector<double> d1 = b, d2 = b;
    ref.curl_h(d1.data() + 1, a.data() + 1, 0.3, n);
    wide.curl_h(d2.data() + 1, a.data() + 1, 0.3, n);
    CHECK(d1 == d2);

    std::vector<double> m1(n + 1), m2(n + 1);
    ref.multiply(m1.data(), a.data(), b.data(), n);
    wide.multiply(m2.data(), a.data(), b.data(), n);
    CHECK(m1 == m2);

    // reduction: same lane order, so equal to rounding
    const double s1 = ref.dot(a.data(), b.data(), n);
    const double s2 = wide.dot(a.data(), b.data(), n);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    CHECK(std::abs(s1 - s2) <= 1e-15 * mag);
  }
}

TEST_CASE("convolutions agree across variants") {
  if (!simd::is_available(simd::Isa::avx2)) return;
  IsaGuard guard;
  const double dt = 1e-9;
  std::vector<double> mem = noise(300, 7);
  const AdmittanceKernel k{0.01, 1e-10, Waveform(0.0, dt, mem, "S/s")};
  const Waveform v(0.0, dt, noise(2000, 8), "V");
  const VolterraKernel2 k2(dt, 12, noise(144, 9));

  simd::set_active_isa(simd::Isa::scalar);
  const Waveform i1 = convolve_first_order(k, v);
  const Waveform q1 = convolve_second_order(k2, v);
  simd::set_active_isa(simd::Isa::avx2);
  const Waveform i2 = convolve_first_order(k, v);
  const Waveform q2 = convolve_second_order(k2, v);

  double worst = 0.0, scale = 0.0;
  for (std::size_t n = 0; n < i1.size(); ++n) {
    worst = std::max(worst, std::abs(i1[n] - i2[n]));
    scale = std::max(scale, std::abs(i1[n]));
  }
  CHECK(worst <= 1e-12 * scale);
  worst = scale = 0.0;
  for (std::size_t n = 0; n < q1.size(); ++n) {
    worst = std::max(worst, std::abs(q1[n] - q2[n]));
    scale = std::max(scale, std::abs(q1[n]));
  }
  CHECK(worst <= 1e-12 * scale);
}
