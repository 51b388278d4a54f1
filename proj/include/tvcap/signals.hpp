#pragma once

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tvcap {

// Uniformly sampled real signal. The unit is a plain string ("V", "A",
// "F", "V/m", ...) compared for equality wherever two signals meet.
class Waveform {
 public:
  Waveform(double t0, double dt, std::vector<double> samples, std::string unit);

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  std::size_t size() const noexcept { return samples_.size(); }
  const std::string& unit() const noexcept { return unit_; }
  std::span<const double> samples() const noexcept { return samples_; }
  const std::vector<double>& values() const noexcept { return samples_; }

  double operator[](std::size_t k) const { return samples_[k]; }
  double time(std::size_t k) const noexcept { return t0_ + static_cast<double>(k) * dt_; }
  double end_time() const noexcept { return time(samples_.size() - 1); }

  // Linear interpolation; clamps to the end samples outside the span.
  double at(double t) const;

  // Index of the first sample at or after t (within a tiny grid tolerance).
  std::size_t index_at_or_after(double t) const;

  Waveform slice(std::size_t first, std::size_t count) const;
  Waveform with_unit(std::string unit) const;

  double min() const;
  double max() const;
  double mean() const;

 private:
  double t0_;
  double dt_;
  std::vector<double> samples_;
  std::string unit_;
};

bool same_grid(const Waveform& a, const Waveform& b);
void require_same_grid(const Waveform& a, const Waveform& b, const char* what);
void require_unit(const Waveform& w, const std::string& unit, const char* what);

// v(t) = dc + amplitude * cos(omega * t + phase)
struct HarmonicSignal {
  double dc = 0.0;
  double amplitude = 0.0;
  double omega = 1.0;
  double phase = 0.0;

  double operator()(double t) const;
  double derivative(double t) const;
  double period() const;
  double frequency() const;
  std::complex<double> phasor() const { return std::polar(amplitude, phase); }
  void validate() const;
};

struct Phasor {
  double amplitude = 0.0;
  double phase = 0.0;  // (-pi, pi]
  double omega = 0.0;

  std::complex<double> complex() const { return std::polar(amplitude, phase); }
  static Phasor from_complex(std::complex<double> z, double omega);
};

double normalize_phase(double phase);

// Unit bookkeeping for integration and differentiation in time.
std::string unit_times_seconds(const std::string& unit);
std::string unit_per_second(const std::string& unit);

Waveform sample(const HarmonicSignal& h, double t0, double dt, std::size_t n,
                const std::string& unit = "V");

// Trapezoidal running integral; out[0] == initial.
Waveform cumulative_integral(const Waveform& w, double initial = 0.0);

// Second-order central differences inside, second-order one-sided at the ends.
Waveform derivative(const Waveform& w);

// Zero-phase single-pole low-pass (forward then backward pass), unity gain at DC.
Waveform lowpass(const Waveform& w, double f_cut);

// Least-squares fit of a + b cos(wt) + c sin(wt) over [t_start, end],
// trimmed to a whole number of periods. Needs at least three periods.
Phasor steady_state_phasor(const Waveform& w, double omega, double t_start);

// Same fit, also returning the DC term a.
struct HarmonicFit {
  double offset = 0.0;
  Phasor phasor;
};
HarmonicFit fit_harmonic(const Waveform& w, double omega, double t_start);

// CSV with header "t,<unit>" and 17 significant digits.
void write_csv(std::ostream& out, const Waveform& w);
Waveform read_csv(std::istream& in);

}  // namespace tvcap
