#include "tvcap/signals.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>

#include "tvcap/constants.hpp"
#include "tvcap/csv.hpp"
#include "tvcap/error.hpp"

namespace tvcap {

Waveform::Waveform(double t0, double dt, std::vector<double> samples, std::string unit)
    : t0_(t0), dt_(dt), samples_(std::move(samples)), unit_(std::move(unit)) {
  require(std::isfinite(dt_) && dt_ > 0.0, Errc::invalid_grid, "time step must be positive and finite");
  require(std::isfinite(t0_), Errc::invalid_grid, "start time must be finite");
  require(samples_.size() >= 2, Errc::invalid_grid, "a waveform needs at least two samples");
  for (std::size_t k = 0; k < samples_.size(); ++k) {
    if (!std::isfinite(samples_[k])) {
      fail(Errc::invalid_argument, "non-finite sample at index " + std::to_string(k) + " (" + unit_ + ")");
    }
  }
}

double Waveform::at(double t) const {
  const double x = (t - t0_) / dt_;
  if (x <= 0.0) return samples_.front();
  const auto last = static_cast<double>(samples_.size() - 1);
  if (x >= last) return samples_.back();
  const auto k = static_cast<std::size_t>(x);
  const double frac = x - static_cast<double>(k);
  if (frac == 0.0) return samples_[k];
  return samples_[k] + frac * (samples_[k + 1] - samples_[k]);
}

std::size_t Waveform::index_at_or_after(double t) const {
  const double x = (t - t0_) / dt_;
  if (x <= 0.0) return 0;
  const double k = std::ceil(x - 1e-9);
  return std::min(static_cast<std::size_t>(k), samples_.size());
}

Waveform Waveform::slice(std::size_t first, std::size_t count) const {
  require(first + count <= samples_.size(), Errc::invalid_argument, "slice outside the waveform");
  std::vector<double> part(samples_.begin() + static_cast<std::ptrdiff_t>(first),
                           samples_.begin() + static_cast<std::ptrdiff_t>(first + count));
  return Waveform(time(first), dt_, std::move(part), unit_);
}

Waveform Waveform::with_unit(std::string unit) const { return Waveform(t0_, dt_, samples_, std::move(unit)); }

double Waveform::min() const { return *std::min_element(samples_.begin(), samples_.end()); }
double Waveform::max() const { return *std::max_element(samples_.begin(), samples_.end()); }
double Waveform::mean() const {
  return std::accumulate(samples_.begin(), samples_.end(), 0.0) / static_cast<double>(samples_.size());
}

bool same_grid(const Waveform& a, const Waveform& b) {
  if (a.size() != b.size()) return false;
  const double tol = 1e-9 * a.dt();
  return std::abs(a.t0() - b.t0()) <= tol && std::abs(a.dt() - b.dt()) <= 1e-12 * a.dt();
}

void require_same_grid(const Waveform& a, const Waveform& b, const char* what) {
  require(same_grid(a, b), Errc::grid_mismatch, std::string(what) + ": waveforms are on different grids");
}

void require_unit(const Waveform& w, const std::string& unit, const char* what) {
  require(w.unit() == unit, Errc::unit_mismatch,
          std::string(what) + ": expected unit '" + unit + "', got '" + w.unit() + "'");
}

double HarmonicSignal::operator()(double t) const { return dc + amplitude * std::cos(omega * t + phase); }

double HarmonicSignal::derivative(double t) const { return -amplitude * omega * std::sin(omega * t + phase); }

double HarmonicSignal::period() const { return 2.0 * constants::pi / omega; }

double HarmonicSignal::frequency() const { return omega / (2.0 * constants::pi); }

void HarmonicSignal::validate() const {
  require(std::isfinite(omega) && omega > 0.0, Errc::invalid_argument, "harmonic signal needs omega > 0");
  require(std::isfinite(amplitude) && amplitude >= 0.0, Errc::invalid_argument,
          "harmonic amplitude must be non-negative");
  require(std::isfinite(dc) && std::isfinite(phase), Errc::invalid_argument, "harmonic offset/phase must be finite");
}

double normalize_phase(double phase) {
  const double two_pi = 2.0 * constants::pi;
  double p = std::fmod(phase, two_pi);
  if (p <= -constants::pi) p += two_pi;
  if (p > constants::pi) p -= two_pi;
  return p;
}

Phasor Phasor::from_complex(std::complex<double> z, double omega) {
  return Phasor{std::abs(z), normalize_phase(std::arg(z)), omega};
}

std::string unit_times_seconds(const std::string& unit) {
  if (unit.size() > 2 && unit.ends_with("/s")) return unit.substr(0, unit.size() - 2);
  return unit + "*s";
}

std::string unit_per_second(const std::string& unit) {
  if (unit.size() > 2 && unit.ends_with("*s")) return unit.substr(0, unit.size() - 2);
  return unit + "/s";
}

Waveform sample(const HarmonicSignal& h, double t0, double dt, std::size_t n, const std::string& unit) {
  require(n >= 2 && dt > 0.0 && std::isfinite(dt), Errc::invalid_grid, "sampling needs n >= 2 and dt > 0");
  h.validate();
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = h(t0 + static_cast<double>(k) * dt);
  return Waveform(t0, dt, std::move(values), unit);
}

Waveform cumulative_integral(const Waveform& w, double initial) {
  const auto x = w.samples();
  std::vector<double> out(x.size());
  const double half_dt = 0.5 * w.dt();
  out[0] = initial;
  for (std::size_t k = 1; k < x.size(); ++k) out[k] = out[k - 1] + half_dt * (x[k - 1] + x[k]);
  return Waveform(w.t0(), w.dt(), std::move(out), unit_times_seconds(w.unit()));
}

Waveform derivative(const Waveform& w) {
  require(w.size() >= 3, Errc::too_short, "derivative needs at least three samples");
  const auto x = w.samples();
  const std::size_t n = x.size();
  const double inv_2dt = 1.0 / (2.0 * w.dt());
  std::vector<double> out(n);
  out[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) * inv_2dt;
  for (std::size_t k = 1; k + 1 < n; ++k) out[k] = (x[k + 1] - x[k - 1]) * inv_2dt;
  out[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) * inv_2dt;
  return Waveform(w.t0(), w.dt(), std::move(out), unit_per_second(w.unit()));
}

Waveform lowpass(const Waveform& w, double f_cut) {
  const double nyquist = 0.5 / w.dt();
  require(std::isfinite(f_cut) && f_cut > 0.0 && f_cut < nyquist, Errc::cutoff_above_nyquist,
          "cutoff must lie in (0, 1/(2 dt))");
  const double alpha = 1.0 - std::exp(-2.0 * constants::pi * f_cut * w.dt());
  const std::vector<double>& x = w.values();
  const std::size_t n = x.size();
  const double mean = w.mean();
  // mirror the record at both ends so neither pass starts inside the data
  const std::size_t pad = n < 2 ? 0 : std::min<std::size_t>(n - 1, static_cast<std::size_t>(std::ceil(10.0 / alpha)));
  std::vector<double> y;
  y.reserve(n + 2 * pad);
  for (std::size_t k = pad; k > 0; --k) y.push_back(x[k]);
  y.insert(y.end(), x.begin(), x.end());
  for (std::size_t k = 1; k <= pad; ++k) y.push_back(x[n - 1 - k]);
  double state = mean;
  for (double& v : y) v = state += alpha * (v - state);
  state = mean;
  for (auto it = y.rbegin(); it != y.rend(); ++it) *it = state += alpha * (*it - state);
  y.erase(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(pad));
  y.resize(n);
  // unity DC gain: remove what is left of the edge transients from the mean
  const double shift = mean - std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  for (double& v : y) v += shift;
  return Waveform(w.t0(), w.dt(), std::move(y), w.unit());
}

HarmonicFit fit_harmonic(const Waveform& w, double omega, double t_start) {
  require(std::isfinite(omega) && omega > 0.0, Errc::invalid_argument, "phasor fit needs omega > 0");
  const double period = 2.0 * constants::pi / omega;
  const std::size_t first = w.index_at_or_after(t_start);
  require(first < w.size(), Errc::window_too_short, "fit window starts after the waveform ends");
  const double span = static_cast<double>(w.size() - 1 - first) * w.dt();
  const double periods = std::floor(span / period + 1e-9);
  require(periods >= 3.0, Errc::window_too_short, "fit window must cover at least three periods");
  const auto count = static_cast<std::size_t>(std::llround(periods * period / w.dt()));
  const std::size_t n = std::min(count, w.size() - first);

  Eigen::Matrix3d normal = Eigen::Matrix3d::Zero();
  Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
  for (std::size_t k = first; k < first + n; ++k) {
    const double phase = omega * w.time(k);
    const Eigen::Vector3d basis(1.0, std::cos(phase), std::sin(phase));
    normal.noalias() += basis * basis.transpose();
    rhs.noalias() += basis * w[k];
  }
  const Eigen::Vector3d coef = normal.ldlt().solve(rhs);
  // b cos + c sin == A cos(wt + phi) with A cos phi = b, A sin phi = -c
  HarmonicFit fit;
  fit.offset = coef(0);
  fit.phasor = Phasor::from_complex({coef(1), -coef(2)}, omega);
  return fit;
}

Phasor steady_state_phasor(const Waveform& w, double omega, double t_start) {
  return fit_harmonic(w, omega, t_start).phasor;
}

void write_csv(std::ostream& out, const Waveform& w) {
  std::vector<double> t(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) t[k] = w.time(k);
  const csv::Column columns[] = {{"t", t}, {w.unit(), w.samples()}};
  csv::write_columns(out, columns);
}

Waveform read_csv(std::istream& in) {
  const auto table = csv::read_table(in);
  require(table.header.size() == 2 && table.header[0] == "t", Errc::parse_error,
          "waveform CSV needs header 't,<unit>'");
  require(table.rows.size() >= 2, Errc::parse_error, "waveform CSV needs at least two rows");
  const double t0 = table.rows[0][0];
  const double dt = table.rows[1][0] - t0;
  std::vector<double> values;
  values.reserve(table.rows.size());
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    const double expected = t0 + static_cast<double>(k) * dt;
    require(std::abs(table.rows[k][0] - expected) <= 1e-6 * dt, Errc::parse_error,
            "waveform CSV is not uniformly sampled at row " + std::to_string(k + 2));
    values.push_back(table.rows[k][1]);
  }
  return Waveform(t0, dt, std::move(values), table.header[1]);
}

}  // namespace tvcap
