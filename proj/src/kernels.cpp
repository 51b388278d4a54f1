#include "tvcap/kernels.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <string>

#include "tvcap/csv.hpp"
#include "tvcap/error.hpp"
#include "tvcap/simd.hpp"

namespace tvcap {

namespace {

bool is_integer_ratio(double big, double small, long& ratio) {
  const double r = big / small;
  ratio = std::lround(r);
  return ratio >= 1 && std::abs(r - static_cast<double>(ratio)) <= 1e-9 * r;
}

// Trapezoid weights on n nodes of spacing h.
std::vector<double> trapezoid_weights(std::size_t n, double h) {
  std::vector<double> w(n, h);
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

}  // namespace

std::string current_unit_for(const std::string& voltage_unit) {
  if (voltage_unit == "V") return "A";
  if (voltage_unit == "V/m") return "A/m";
  fail(Errc::unit_mismatch, "expected a voltage ('V') or field ('V/m') waveform, got '" + voltage_unit + "'");
}

void AdmittanceKernel::validate() const {
  require(std::isfinite(g0) && std::isfinite(c0), Errc::invalid_argument, "kernel weights must be finite");
  if (smooth) {
    require(std::abs(smooth->t0()) <= 1e-12 * smooth->dt(), Errc::invalid_argument,
            "smooth kernel must start at gamma = 0");
  }
}

std::complex<double> AdmittanceKernel::response(double omega) const {
  std::complex<double> y(g0, omega * c0);
  if (smooth) {
    const auto w = trapezoid_weights(smooth->size(), smooth->dt());
    for (std::size_t m = 0; m < smooth->size(); ++m) {
      y += w[m] * (*smooth)[m] * std::polar(1.0, -omega * smooth->time(m));
    }
  }
  return y;
}

std::size_t AdmittanceKernel::history_samples(double dt) const {
  if (!smooth) return 0;
  return resample_kernel(*smooth, dt).size() - 1;
}

std::vector<double> resample_kernel(const Waveform& smooth, double dt) {
  long ratio = 0;
  if (!is_integer_ratio(smooth.dt(), dt, ratio) && !is_integer_ratio(dt, smooth.dt(), ratio)) {
    fail(Errc::incommensurate_grids, "kernel step and signal step must differ by an integer ratio");
  }
  const double support = smooth.end_time() - smooth.t0();
  const auto count = static_cast<std::size_t>(std::floor(support / dt + 1e-9)) + 1;
  require(count >= 2, Errc::incommensurate_grids, "kernel support is shorter than one signal step");
  std::vector<double> out(count);
  for (std::size_t m = 0; m < count; ++m) out[m] = smooth.at(smooth.t0() + static_cast<double>(m) * dt);
  return out;
}

Waveform convolve_smooth(const AdmittanceKernel& k, const Waveform& v) {
  k.validate();
  const std::string unit = current_unit_for(v.unit());
  const double dt = v.dt();
  std::vector<double> taps;
  if (k.smooth) {
    taps = resample_kernel(*k.smooth, dt);
  } else {
    taps = {0.0};
  }
  const std::size_t history = taps.size() - 1;
  require(v.size() >= history + 2, Errc::insufficient_history,
          "signal is shorter than the kernel support plus two samples");

  // reversed[j] = w[history - j] * K[history - j] so that the dot product
  // with v[n - history .. n] is the trapezoidal convolution sum.
  const auto weights = trapezoid_weights(taps.size(), dt);
  std::vector<double> reversed(taps.size());
  for (std::size_t j = 0; j < taps.size(); ++j) {
    reversed[j] = taps.size() > 1 ? weights[history - j] * taps[history - j] : 0.0;
  }
  const auto& kern = simd::kernels();
  const std::size_t out_n = v.size() - history;
  std::vector<double> out(out_n);
  const double* x = v.samples().data();
  for (std::size_t n = 0; n < out_n; ++n) out[n] = kern.dot(reversed.data(), x + n, reversed.size());
  return Waveform(v.time(history), dt, std::move(out), unit);
}

Waveform convolve_first_order(const AdmittanceKernel& k, const Waveform& v) {
  Waveform smooth_part = convolve_smooth(k, v);
  const std::size_t history = v.size() - smooth_part.size();
  std::vector<double> out(smooth_part.values());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += k.g0 * v[n + history];
  if (k.c0 != 0.0) {
    const Waveform dv = derivative(v);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += k.c0 * dv[n + history];
  }
  return Waveform(smooth_part.t0(), smooth_part.dt(), std::move(out), smooth_part.unit());
}

VolterraKernel2::VolterraKernel2(double dgamma, std::size_t n, std::vector<double> values)
    : dgamma_(dgamma), n_(n), values_(std::move(values)) {
  require(std::isfinite(dgamma_) && dgamma_ > 0.0, Errc::invalid_grid, "second-order kernel needs dgamma > 0");
  require(n_ >= 2, Errc::invalid_grid, "second-order kernel needs at least a 2x2 grid");
  require(values_.size() == n_ * n_, Errc::invalid_argument, "second-order kernel must be n x n");
  for (double x : values_) require(std::isfinite(x), Errc::invalid_argument, "second-order kernel has non-finite values");
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const double s = 0.5 * (values_[i * n_ + j] + values_[j * n_ + i]);
      values_[i * n_ + j] = s;
      values_[j * n_ + i] = s;
    }
  }
}

VolterraKernel2 VolterraKernel2::memoryless(double weight, double dgamma) {
  // corner trapezoid weight is (dgamma / 2)^2
  std::vector<double> values(4, 0.0);
  values[0] = weight / (0.25 * dgamma * dgamma);
  return VolterraKernel2(dgamma, 2, std::move(values));
}

VolterraKernel2 VolterraKernel2::zero(double dgamma, std::size_t n) {
  return VolterraKernel2(dgamma, n, std::vector<double>(n * n, 0.0));
}

double VolterraKernel2::mass() const {
  const auto w = trapezoid_weights(n_, dgamma_);
  double total = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) total += w[i] * w[j] * value(i, j);
  }
  return total;
}

bool VolterraKernel2::is_zero() const {
  for (double x : values_) {
    if (x != 0.0) return false;
  }
  return true;
}

VolterraKernel2 VolterraKernel2::transposed() const {
  std::vector<double> t(values_.size());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) t[j * n_ + i] = value(i, j);
  }
  return VolterraKernel2(dgamma_, n_, std::move(t));
}

Waveform convolve_second_order(const VolterraKernel2& k2, const Waveform& v) {
  const std::string unit = current_unit_for(v.unit());
  long stride = 0;
  require(is_integer_ratio(k2.dgamma(), v.dt(), stride), Errc::incommensurate_grids,
          "second-order kernel step must be an integer multiple of the signal step");
  const std::size_t n = k2.extent();
  const std::size_t step = static_cast<std::size_t>(stride);
  const std::size_t history = (n - 1) * step;
  require(v.size() >= history + 2, Errc::insufficient_history,
          "signal is shorter than the second-order kernel support plus two samples");

  const auto weights = trapezoid_weights(n, k2.dgamma());
  const auto& kern = simd::kernels();
  const std::size_t out_n = v.size() - history;
  std::vector<double> out(out_n);
  std::vector<double> u(n);
  for (std::size_t m = 0; m < out_n; ++m) {
    const std::size_t now = m + history;
    for (std::size_t j = 0; j < n; ++j) u[j] = weights[j] * v[now - j * step];
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (u[j] == 0.0) continue;
      total += u[j] * kern.dot(k2.values().data() + j * n, u.data(), n);
    }
    out[m] = total;
  }
  return Waveform(v.time(history), v.dt(), std::move(out), unit);
}

void write_kernel_csv(std::ostream& out, const Waveform& smooth) {
  std::vector<double> gamma(smooth.size());
  for (std::size_t k = 0; k < smooth.size(); ++k) gamma[k] = smooth.time(k);
  const csv::Column columns[] = {{"gamma", gamma}, {"value", smooth.samples()}};
  csv::write_columns(out, columns);
}

Waveform read_kernel_csv(std::istream& in) {
  const auto table = csv::read_table(in);
  require(table.header.size() == 2 && table.header[0] == "gamma" && table.header[1] == "value",
          Errc::parse_error, "kernel CSV needs header 'gamma,value'");
  require(table.rows.size() >= 2, Errc::parse_error, "kernel CSV needs at least two rows");
  const double g0 = table.rows[0][0];
  const double dg = table.rows[1][0] - g0;
  require(std::abs(g0) <= 1e-12 * std::abs(dg), Errc::parse_error, "kernel CSV must start at gamma = 0");
  std::vector<double> values;
  for (std::size_t k = 0; k < table.rows.size(); ++k) {
    require(std::abs(table.rows[k][0] - static_cast<double>(k) * dg) <= 1e-6 * dg, Errc::parse_error,
            "kernel CSV is not uniformly sampled at row " + std::to_string(k + 2));
    values.push_back(table.rows[k][1]);
  }
  return Waveform(0.0, dg, std::move(values), "S/s");
}

void write_kernel2_csv(std::ostream& out, const VolterraKernel2& k2) {
  out << "dgamma," << csv::format_double(k2.dgamma()) << '\n';
  for (std::size_t i = 0; i < k2.extent(); ++i) {
    for (std::size_t j = 0; j < k2.extent(); ++j) out << (j ? "," : "") << csv::format_double(k2.value(i, j));
    out << '\n';
  }
}

VolterraKernel2 read_kernel2_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), Errc::parse_error, "empty second-order kernel CSV");
  const auto head = csv::split(line);
  require(head.size() == 2 && head[0] == "dgamma", Errc::parse_error, "second-order kernel CSV needs 'dgamma,<value>'");
  double dgamma = 0.0;
  try {
    dgamma = std::stod(head[1]);
  } catch (const std::exception&) {
    fail(Errc::parse_error, "bad dgamma value '" + head[1] + "'");
  }
  std::vector<double> values;
  std::size_t n = 0;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (rows == 0) n = fields.size();
    require(fields.size() == n, Errc::parse_error, "second-order kernel rows have unequal length");
    for (const auto& f : fields) {
      try {
        values.push_back(std::stod(f));
      } catch (const std::exception&) {
        fail(Errc::parse_error, "bad kernel value '" + f + "'");
      }
    }
    ++rows;
  }
  require(rows == n, Errc::parse_error, "second-order kernel CSV must be square");
  return VolterraKernel2(dgamma, n, std::move(values));
}

}  // namespace tvcap
