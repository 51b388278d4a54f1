#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "tvcap/signals.hpp"

namespace tvcap {

// First-order admittance kernel Y(gamma) = g0 delta(gamma) + c0 delta'(gamma) + smooth(gamma).
// The singular parts are kept as weights; only the smooth part is sampled.
struct AdmittanceKernel {
  double g0 = 0.0;                 // S
  double c0 = 0.0;                 // F
  std::optional<Waveform> smooth;  // S/s on gamma >= 0, first sample at gamma = 0

  void validate() const;

  // Y(j omega) = g0 + j omega c0 + integral smooth(gamma) exp(-j omega gamma) dgamma
  std::complex<double> response(double omega) const;

  // Number of past samples (on a grid of step dt) the smooth part reaches back.
  std::size_t history_samples(double dt) const;

  bool has_smooth() const { return smooth.has_value(); }
};

// Symmetric second-order Volterra kernel sampled on [0, G]^2 with step dgamma.
class VolterraKernel2 {
 public:
  // values are row-major n x n; the stored kernel is (K + K^T) / 2.
  VolterraKernel2(double dgamma, std::size_t n, std::vector<double> values);

  // Single grid cell carrying the mass `weight`, i.e. weight * delta(g1) delta(g2).
  static VolterraKernel2 memoryless(double weight, double dgamma);
  static VolterraKernel2 zero(double dgamma, std::size_t n);

  double dgamma() const noexcept { return dgamma_; }
  std::size_t extent() const noexcept { return n_; }
  double value(std::size_t i, std::size_t j) const { return values_[i * n_ + j]; }
  const std::vector<double>& values() const noexcept { return values_; }

  // 2D trapezoid sum of the kernel (the response to a unit constant input).
  double mass() const;
  bool is_zero() const;
  VolterraKernel2 transposed() const;

 private:
  double dgamma_;
  std::size_t n_;
  std::vector<double> values_;
};

// The smooth part resampled onto a signal grid of step dt (linear interpolation),
// provided the two steps differ by an integer ratio.
std::vector<double> resample_kernel(const Waveform& smooth, double dt);

// i(t) = g0 v(t) + c0 dv/dt + (smooth * v)(t). The result starts where the full
// kernel history is available.
Waveform convolve_first_order(const AdmittanceKernel& k, const Waveform& v);

// Smooth part only, same output grid as convolve_first_order.
Waveform convolve_smooth(const AdmittanceKernel& k, const Waveform& v);

// i(t) = double integral K2(g1, g2) v(t - g1) v(t - g2).
Waveform convolve_second_order(const VolterraKernel2& k2, const Waveform& v);

// Unit of the current produced by a voltage-like unit ("V" -> "A", "V/m" -> "A/m").
std::string current_unit_for(const std::string& voltage_unit);

// Smooth kernel CSV: header "gamma,value".
void write_kernel_csv(std::ostream& out, const Waveform& smooth);
Waveform read_kernel_csv(std::istream& in);

// Second-order kernel CSV: first line "dgamma,<value>", then n rows of n values.
void write_kernel2_csv(std::ostream& out, const VolterraKernel2& k2);
VolterraKernel2 read_kernel2_csv(std::istream& in);

}  // namespace tvcap
