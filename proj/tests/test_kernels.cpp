#include <cmath>
#include <sstream>

#include "doctest.h"
#include "tvcap/constants.hpp"
#include "tvcap/error.hpp"
#include "tvcap/kernels.hpp"

using namespace tvcap;
using constants::pi;

namespace {

const double kOmega = 2.0 * pi * 1e6;
const double kDt = 1e-6 / 2000;

Waveform drive(double dc, double amp, std::size_t periods, double phase = 0.0) {
  return sample(HarmonicSignal{dc, amp, kOmega, phase}, 0.0, kDt, periods * 2000 + 1);
}

Waveform exp_kernel(double amplitude, double tau, double span, double dg) {
  const auto n = static_cast<std::size_t>(std::llround(span / dg)) + 1;
  std::vector<double> v(n);
  for (std::size_t m = 0; m < n; ++m) v[m] = amplitude * std::exp(-static_cast<double>(m) * dg / tau);
  return Waveform(0.0, dg, std::move(v), "S/s");
}

}  // namespace

TEST_CASE("pure conductance") {
  const AdmittanceKernel k{0.1, 0.0, std::nullopt};
  const Waveform v = drive(6.0, 1.0, 3);
  const Waveform i = convolve_first_order(k, v);
  REQUIRE(i.size() == v.size());
  CHECK(i.unit() == "A");
  for (std::size_t n = 0; n < i.size(); ++n) {
    CHECK(i[n] == doctest::Approx(0.6 + 0.1 * std::cos(kOmega * i.time(n))).epsilon(1e-12));
  }
}

TEST_CASE("delta-prime weight acts as a capacitor") {
  const AdmittanceKernel k{0.0, -1e-9, std::nullopt};
  const Waveform v = drive(0.0, 1.0, 4);
  const Waveform i = convolve_first_order(k, v);
  CHECK(steady_state_phasor(i, kOmega, 0.5e-6).amplitude == doctest::Approx(6.283e-3).epsilon(1e-3));
  const Waveform dv = derivative(v);
  double worst = 0.0;
  for (std::size_t n = 0; n < i.size(); ++n) worst = std::max(worst, std::abs(i[n] - (-1e-9) * dv[n]));
  CHECK(worst <= 1e-12 * 6.283e-3);
}

TEST_CASE("exponential memory reproduces the RC step response") {
  const double R = 10.0, C = 1e-9, RC = R * C;
  const double dt = RC / 200;
  const AdmittanceKernel k{0.0, 0.0, exp_kernel(1.0 / (R * RC), RC, 10.0 * RC, dt)};
  // unit step at t = 0, history reaching back 10 RC
  const std::size_t pre = 2000, post = 2000;
  std::vector<double> v(pre + post + 1, 0.0);
  for (std::size_t n = pre; n < v.size(); ++n) v[n] = 1.0;
  v[pre] = 0.5;  // midpoint value at the jump
  const Waveform step(-static_cast<double>(pre) * dt, dt, v, "V");
  const Waveform i = convolve_first_order(k, step);
  CHECK(i.t0() == doctest::Approx(0.0).epsilon(1e-12));
  for (std::size_t n = 20; n < i.size(); n += 97) {
    const double want = (1.0 - std::exp(-i.time(n) / RC)) / R;
    CHECK(std::abs(i[n] - want) <= 0.01 * want);
  }
  // with the conductance 1/R and the memory subtracted: the charging current of a series RC
  const AdmittanceKernel series{1.0 / R, 0.0, exp_kernel(-1.0 / (R * RC), RC, 10.0 * RC, dt)};
  const Waveform ic = convolve_first_order(series, step);
  for (std::size_t n = 20; n < ic.size(); n += 97) {
    const double want = std::exp(-ic.time(n) / RC) / R;
    CHECK(std::abs(ic[n] - want) <= 0.01 / R);
  }
}

TEST_CASE("kernel frequency response") {
  const double tau = 2e-7;
  const AdmittanceKernel k{0.02, -5e-10, exp_kernel(1e4, tau, 20.0 * tau, 1e-10)};
  const std::complex<double> want =
      0.02 + std::complex<double>(0.0, kOmega * -5e-10) + 1e4 * tau / std::complex<double>(1.0, kOmega * tau);
  CHECK(std::abs(k.response(kOmega) - want) <= 1e-3 * std::abs(want));
}

TEST_CASE("history requirements") {
  const AdmittanceKernel k{0.0, 0.0, exp_kernel(1.0, 1e-7, 1e-6, kDt)};
  CHECK_THROWS_AS(convolve_first_order(k, drive(6.0, 1.0, 1)), Error);
  const Waveform i = convolve_first_order(k, drive(6.0, 1.0, 3));
  CHECK(i.t0() == doctest::Approx(1e-6));
  CHECK(k.history_samples(kDt) == 2000);
  Waveform late(1e-9, kDt, std::vector<double>(10, 1.0), "S/s");
  CHECK_THROWS_AS((AdmittanceKernel{0.0, 0.0, late}.validate()), Error);
}

TEST_CASE("first-order convolution is linear") {
  const AdmittanceKernel k{0.03, 2e-10, exp_kernel(3e4, 1e-7, 1e-6, kDt)};
  const Waveform v1 = drive(6.0, 1.0, 4);
  const Waveform v2 = drive(-2.0, 0.5, 4, 0.7);
  std::vector<double> mix(v1.size());
  for (std::size_t n = 0; n < mix.size(); ++n) mix[n] = 2.0 * v1[n] - 3.0 * v2[n];
  const Waveform i = convolve_first_order(k, Waveform(0.0, kDt, mix, "V"));
  const Waveform i1 = convolve_first_order(k, v1);
  const Waveform i2 = convolve_first_order(k, v2);
  for (std::size_t n = 0; n < i.size(); ++n) {
    const double want = 2.0 * i1[n] - 3.0 * i2[n];
    CHECK(std::abs(i[n] - want) <= 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("convolutions are causal") {
  const AdmittanceKernel k{0.03, 0.0, exp_kernel(3e4, 1e-7, 5e-7, kDt)};
  const Waveform v = drive(6.0, 1.0, 4);
  std::vector<double> bumped(v.values());
  const std::size_t star = 5000;
  for (std::size_t n = star; n < bumped.size(); ++n) bumped[n] += 0.3;
  const Waveform vb(0.0, kDt, bumped, "V");
  const Waveform a = convolve_first_order(k, v);
  const Waveform b = convolve_first_order(k, vb);
  for (std::size_t n = 0; n < a.size() && a.time(n) < v.time(star) - 1e-15; ++n) CHECK(a[n] == b[n]);

  const VolterraKernel2 k2 = VolterraKernel2::zero(kDt * 10, 8);
  std::vector<double> vals(64);
  for (std::size_t q = 0; q < vals.size(); ++q) vals[q] = 1e3 * std::exp(-0.1 * static_cast<double>(q));
  const VolterraKernel2 k2b(kDt * 10, 8, vals);
  const Waveform s = convolve_second_order(k2b, v);
  const Waveform sb = convolve_second_order(k2b, vb);
  for (std::size_t n = 0; n < s.size() && s.time(n) < v.time(star) - 1e-15; ++n) CHECK(s[n] == sb[n]);
  CHECK(k2.is_zero());
}

TEST_CASE("second-order convolution") {
  const Waveform v = drive(6.0, 1.0, 2);
  const Waveform zero = convolve_second_order(VolterraKernel2::zero(kDt, 4), v);
  for (double x : zero.samples()) CHECK(x == 0.0);

  const double w = 0.01;
  const Waveform sq = convolve_second_order(VolterraKernel2::memoryless(w, kDt), v);
  for (std::size_t n = 0; n < sq.size(); ++n) {
    const double x = v.at(sq.time(n));
    CHECK(std::abs(sq[n] - w * x * x) <= 0.02 * w * x * x);
  }

  std::vector<double> vals(25);
  for (std::size_t q = 0; q < vals.size(); ++q) vals[q] = 1e12 * (1.0 + static_cast<double>(q % 7));
  const VolterraKernel2 k2(2.0 * kDt, 5, vals);
  const Waveform dc(0.0, kDt, std::vector<double>(40, 3.0), "V");
  const Waveform out = convolve_second_order(k2, dc);
  for (double x : out.samples()) CHECK(x == doctest::Approx(k2.mass() * 9.0).epsilon(1e-12));

  // symmetric part only
  const Waveform a = convolve_second_order(k2, v);
  const Waveform b = convolve_second_order(k2.transposed(), v);
  for (std::size_t n = 0; n < a.size(); ++n) CHECK(a[n] == doctest::Approx(b[n]).epsilon(1e-14));
  CHECK(k2.value(1, 3) == k2.value(3, 1));

  CHECK_THROWS_AS(convolve_second_order(VolterraKernel2::zero(1.5 * kDt, 3), v), Error);
  CHECK_THROWS_AS(convolve_second_order(VolterraKernel2::zero(kDt, 200), Waveform(0.0, kDt, {1.0, 2.0, 3.0}, "V")),
                  Error);
}

TEST_CASE("kernel csv round trips") {
  const Waveform s = exp_kernel(2e4, 1e-7, 1e-6, 1e-8);
  std::stringstream ss;
  write_kernel_csv(ss, s);
  const Waveform back = read_kernel_csv(ss);
  REQUIRE(back.size() == s.size());
  for (std::size_t n = 0; n < s.size(); ++n) CHECK(back[n] == s[n]);

  std::vector<double> vals(9);
  for (std::size_t q = 0; q < 9; ++q) vals[q] = static_cast<double>(q) * 0.25;
  const VolterraKernel2 k2(1e-9, 3, vals);
  std::stringstream s2;
  write_kernel2_csv(s2, k2);
  const VolterraKernel2 b2 = read_kernel2_csv(s2);
  CHECK(b2.extent() == 3);
  CHECK(b2.dgamma() == 1e-9);
  for (std::size_t q = 0; q < 9; ++q) CHECK(b2.values()[q] == k2.values()[q]);

  std::stringstream bad("gamma,value\n1e-9,1\n2e-9,2\n");
  CHECK_THROWS_AS(read_kernel_csv(bad), Error);
}
