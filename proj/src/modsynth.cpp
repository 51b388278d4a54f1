#include "tvcap/modsynth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tvcap/error.hpp"

namespace tvcap {

namespace {

double median_abs(const Waveform& w) {
  std::vector<double> x(w.values());
  const auto mid = x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2);
  std::nth_element(x.begin(), mid, x.end());
  return std::abs(*mid);
}

double max_abs(const Waveform& w) {
  double m = 0.0;
  for (double x : w.samples()) m = std::max(m, std::abs(x));
  return m;
}

// Default margin for targets without an equivalent capacitance.
double margin_from_raw(const Waveform& raw) {
  double m = 0.1 * median_abs(raw);
  if (m == 0.0) m = 0.1 * max_abs(raw);
  require(m > 0.0, Errc::invalid_argument,
          "raw profile is identically zero, so no default positivity margin exists; set one explicitly");
  return m;
}

std::size_t offset_of(const Waveform& inner, const Waveform& outer) {
  const double x = (inner.t0() - outer.t0()) / outer.dt();
  const long k = std::lround(x);
  require(k >= 0 && std::abs(x - static_cast<double>(k)) <= 1e-6 &&
              static_cast<std::size_t>(k) + inner.size() <= outer.size(),
          Errc::grid_mismatch, "profile grid is not a sub-grid of the voltage grid");
  return static_cast<std::size_t>(k);
}

struct Assembled {
  Waveform capacitance;
  double constant;
  double margin;
};

// C = k / v + raw with k either pinned or chosen for positivity.
Assembled assemble(const Waveform& v, const Waveform& raw, std::optional<double> pinned, double margin,
                   const SynthOptions& opts) {
  double k = 0.0;
  if (pinned) {
    k = *pinned;
  } else if (opts.require_positive) {
    k = select_constant_for_positivity(raw, v, margin);
  }
  std::vector<double> c(v.size());
  for (std::size_t n = 0; n < c.size(); ++n) c[n] = k / v[n] + raw[n];
  Waveform capacitance(v.t0(), v.dt(), std::move(c), "F");
  if (opts.require_positive) {
    const double lowest = capacitance.min();
    if (lowest < margin * (1.0 - 1e-12)) {
      std::ostringstream msg;
      msg << "min C(t) = " << lowest << " F is below the margin " << margin << " F with the pinned constant " << k;
      fail(Errc::unsatisfiable_positivity, msg.str());
    }
  }
  return {std::move(capacitance), k, opts.require_positive ? margin : 0.0};
}

ModulationProfile make_profile(Assembled a, std::string target, const SynthOptions& opts) {
  ModulationProfile p{std::move(a.capacitance), {}, std::move(target), a.margin, opts.require_positive,
                      opts.voltage_mode};
  return p;
}

Waveform divide(const Waveform& num, const Waveform& den) {
  std::vector<double> out(num.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = num[n] / den[n];
  return Waveform(den.t0(), den.dt(), std::move(out), "F");
}

void validate_margin(const SynthOptions& opts) {
  if (opts.margin) {
    require(std::isfinite(*opts.margin) && *opts.margin > 0.0, Errc::invalid_argument,
            "positivity margin must be positive");
  }
}

// Q(t) for the linear part of a kernel, on v's grid cropped to `history`.
std::vector<double> linear_charge(const Waveform& v, const AdmittanceKernel& k, std::size_t history) {
  const std::size_t n = v.size() - history;
  const Waveform vc = v.slice(history, n);
  std::vector<double> q(n, 0.0);
  if (k.c0 != 0.0) {
    for (std::size_t m = 0; m < n; ++m) q[m] += k.c0 * vc[m];
  }
  if (k.g0 != 0.0) {
    const Waveform iv = cumulative_integral(vc, 0.0);
    for (std::size_t m = 0; m < n; ++m) q[m] += k.g0 * iv[m];
  }
  if (k.smooth) {
    const Waveform conv = convolve_smooth(k, v);
    const std::size_t skip = history - (v.size() - conv.size());
    const Waveform qs = cumulative_integral(conv.slice(skip, n), 0.0);
    for (std::size_t m = 0; m < n; ++m) q[m] += qs[m];
  }
  return q;
}

}  // namespace

std::string_view to_string(VoltageMode mode) {
  return mode == VoltageMode::external_steady_state ? "external-steady-state" : "filtered-feedback";
}

void validate(const TargetElement& target) {
  std::visit(
      [](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, CapacitanceTarget>) {
          require(std::isfinite(t.C_eq), Errc::invalid_argument, "C_eq must be finite");
        } else if constexpr (std::is_same_v<T, ResistanceTarget>) {
          require(std::isfinite(t.R_eq), Errc::invalid_argument, "R_eq must be finite");
          require(t.R_eq != 0.0, Errc::zero_resistance, "R_eq must be nonzero (the modulation divides by it)");
        } else if constexpr (std::is_same_v<T, LossyInductanceTarget>) {
          require(std::isfinite(t.L_eq) && std::isfinite(t.R_L) && !std::isnan(t.R_C), Errc::invalid_argument,
                  "inductance parameters must be finite");
          require(t.R_L != 0.0 && t.R_C != 0.0, Errc::zero_resistance,
                  "R_L and R_C must be nonzero: the inductance modulation divides by both");
        } else if constexpr (std::is_same_v<T, GeneralTarget>) {
          t.kernel.validate();
        } else {
          t.kernel.validate();
        }
      },
      target);
}

std::string describe(const TargetElement& target) {
  std::ostringstream out;
  std::visit(
      [&out](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, CapacitanceTarget>) {
          out << "capacitance C_eq=" << t.C_eq << " F";
        } else if constexpr (std::is_same_v<T, ResistanceTarget>) {
          out << "resistance R_eq=" << t.R_eq << " Ohm";
        } else if constexpr (std::is_same_v<T, LossyInductanceTarget>) {
          out << "lossy-inductance L_eq=" << t.L_eq << " H R_L=" << t.R_L << " Ohm R_C=" << t.R_C << " Ohm";
        } else if constexpr (std::is_same_v<T, GeneralTarget>) {
          out << "general-lti g0=" << t.kernel.g0 << " S c0=" << t.kernel.c0 << " F"
              << (t.kernel.smooth ? " +smooth" : "");
        } else {
          out << "nonlinear g0=" << t.kernel.g0 << " S c0=" << t.kernel.c0 << " F k2_extent=" << t.kernel2.extent();
        }
      },
      target);
  return out.str();
}

int require_nonvanishing(const Waveform& v, double v_floor_rel) {
  const double floor = v_floor_rel * max_abs(v);
  require(floor > 0.0, Errc::voltage_crosses_zero, "modulation voltage is identically zero");
  const int sign = v[0] > 0.0 ? 1 : -1;
  for (std::size_t n = 0; n < v.size(); ++n) {
    if (std::abs(v[n]) < floor || (v[n] > 0.0 ? 1 : -1) != sign) {
      std::ostringstream msg;
      msg << "modulation voltage reaches zero near t = " << v.time(n) << " s";
      fail(Errc::voltage_crosses_zero, msg.str());
    }
  }
  return sign;
}

double select_constant_for_positivity(const Waveform& raw, const Waveform& v, double margin) {
  require_same_grid(raw, v, "select_constant_for_positivity");
  bool positive = false;
  bool negative = false;
  for (double x : v.samples()) {
    positive |= x > 0.0;
    negative |= x < 0.0;
    require(x != 0.0, Errc::mixed_sign_voltage, "voltage touches zero");
  }
  require(!(positive && negative), Errc::mixed_sign_voltage, "voltage changes sign on the grid");
  // k / v + raw >= margin  <=>  k >= v (margin - raw) for v > 0, k <= v (margin - raw) for v < 0
  double k = positive ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < v.size(); ++n) {
    const double bound = v[n] * (margin - raw[n]);
    k = positive ? std::max(k, bound) : std::min(k, bound);
  }
  return k;
}

ModulationProfile synth_capacitance(const Waveform& v, double C_eq, const SynthOptions& opts) {
  require(std::isfinite(C_eq), Errc::invalid_argument, "C_eq must be finite");
  validate_margin(opts);
  require_nonvanishing(v, opts.v_floor_rel);
  const Waveform raw(v.t0(), v.dt(), std::vector<double>(v.size(), C_eq), "F");
  double margin = 0.0;
  if (opts.require_positive) margin = opts.margin ? *opts.margin : (C_eq != 0.0 ? 0.1 * std::abs(C_eq) : 0.0);
  require(!opts.require_positive || margin > 0.0, Errc::invalid_argument,
          "C_eq = 0 has no default positivity margin; set one explicitly");
  auto a = assemble(v, raw, opts.constant, margin, opts);
  const double c1 = a.constant;
  auto p = make_profile(std::move(a), "capacitance", opts);
  p.constants.c1 = c1;
  return p;
}

ModulationProfile synth_resistance(const Waveform& v, double R_eq, const SynthOptions& opts) {
  require(std::isfinite(R_eq), Errc::invalid_argument, "R_eq must be finite");
  require(R_eq != 0.0, Errc::zero_resistance, "R_eq must be nonzero");
  validate_margin(opts);
  require_nonvanishing(v, opts.v_floor_rel);
  const Waveform iv = cumulative_integral(v, 0.0);
  std::vector<double> r(v.size());
  for (std::size_t n = 0; n < r.size(); ++n) r[n] = iv[n] / (R_eq * v[n]);
  const Waveform raw(v.t0(), v.dt(), std::move(r), "F");
  const double margin = opts.require_positive ? (opts.margin ? *opts.margin : margin_from_raw(raw)) : 0.0;
  auto a = assemble(v, raw, opts.constant, margin, opts);
  const double c2 = a.constant;
  auto p = make_profile(std::move(a), "resistance", opts);
  p.constants.c2 = c2;
  return p;
}

ModulationProfile synth_inductance(const Waveform& v, const Waveform& i, double L_eq, double R_L, double R_C,
                                   const InductanceConstants& constants, const SynthOptions& opts) {
  validate(TargetElement{LossyInductanceTarget{L_eq, R_L, R_C}});
  validate_margin(opts);
  require_same_grid(v, i, "synth_inductance");
  require_unit(i, current_unit_for(v.unit()), "synth_inductance current");
  require_nonvanishing(v, opts.v_floor_rel);
  const Waveform iv = cumulative_integral(v, 0.0);
  // R_C = +inf means no parallel resistor
  const double g_diff = 1.0 / R_L - (std::isinf(R_C) ? 0.0 : 1.0 / R_C);
  std::vector<double> r(v.size());
  for (std::size_t n = 0; n < r.size(); ++n) {
    r[n] = -(L_eq / R_L) * (i[n] / v[n]) + g_diff * (iv[n] / v[n]);
  }
  const Waveform raw(v.t0(), v.dt(), std::move(r), "F");
  const double margin = opts.require_positive ? (opts.margin ? *opts.margin : margin_from_raw(raw)) : 0.0;

  std::optional<double> lump;
  if (constants.c1 && constants.c2) lump = *constants.c1 / R_L + *constants.c2;
  auto a = assemble(v, raw, lump, margin, opts);
  const double k = a.constant;
  auto p = make_profile(std::move(a), "lossy-inductance", opts);
  if (constants.c1 && constants.c2) {
    p.constants.c1 = constants.c1;
    p.constants.c2 = constants.c2;
  } else if (constants.c1) {
    p.constants.c1 = constants.c1;
    p.constants.c2 = k - *constants.c1 / R_L;
  } else if (constants.c2) {
    p.constants.c2 = constants.c2;
    p.constants.c1 = (k - *constants.c2) * R_L;
  } else {
    p.constants.c1 = 0.0;
    p.constants.c2 = k;
  }
  return p;
}

ModulationProfile synth_general(const Waveform& v, const AdmittanceKernel& k, const SynthOptions& opts) {
  k.validate();
  validate_margin(opts);
  current_unit_for(v.unit());
  const std::size_t history = k.history_samples(v.dt());
  require(v.size() >= history + 2, Errc::insufficient_history, "voltage history is shorter than the kernel support");
  const Waveform vc = v.slice(history, v.size() - history);
  require_nonvanishing(vc, opts.v_floor_rel);
  const auto q = linear_charge(v, k, history);
  const Waveform raw = divide(Waveform(vc.t0(), vc.dt(), q, "C"), vc);
  const double margin = opts.require_positive ? (opts.margin ? *opts.margin : margin_from_raw(raw)) : 0.0;
  auto a = assemble(vc, raw, opts.constant, margin, opts);
  const double beta = a.constant;
  auto p = make_profile(std::move(a), "general-lti", opts);
  p.constants.beta = beta;
  return p;
}

ModulationProfile synth_nonlinear(const Waveform& v, const AdmittanceKernel& k1, const VolterraKernel2& k2,
                                  const SynthOptions& opts) {
  k1.validate();
  validate_margin(opts);
  current_unit_for(v.unit());
  const Waveform conv2 = convolve_second_order(k2, v);
  const std::size_t h2 = v.size() - conv2.size();
  const std::size_t history = std::max(k1.history_samples(v.dt()), h2);
  require(v.size() >= history + 2, Errc::insufficient_history, "voltage history is shorter than the kernel support");
  const std::size_t n = v.size() - history;
  const Waveform vc = v.slice(history, n);
  require_nonvanishing(vc, opts.v_floor_rel);
  auto q = linear_charge(v, k1, history);
  const Waveform q2 = cumulative_integral(conv2.slice(history - h2, n), 0.0);
  for (std::size_t m = 0; m < n; ++m) q[m] += q2[m];
  const Waveform raw = divide(Waveform(vc.t0(), vc.dt(), q, "C"), vc);
  const double margin = opts.require_positive ? (opts.margin ? *opts.margin : margin_from_raw(raw)) : 0.0;
  auto a = assemble(vc, raw, opts.constant, margin, opts);
  const double beta = a.constant;
  auto p = make_profile(std::move(a), "nonlinear", opts);
  p.constants.beta = beta;
  return p;
}

Waveform capacitor_current(const ModulationProfile& profile, const Waveform& v) {
  const Waveform& c = profile.capacitance;
  const std::size_t off = offset_of(c, v);
  std::vector<double> cv(c.size());
  for (std::size_t n = 0; n < cv.size(); ++n) cv[n] = c[n] * v[n + off];
  const Waveform charge(c.t0(), c.dt(), std::move(cv), "C");
  return derivative(charge).with_unit(current_unit_for(v.unit()));
}

}  // namespace tvcap
