#include "tvcap/sheetsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tvcap/constants.hpp"
#include "tvcap/error.hpp"
#include "tvcap/fdtd.hpp"
#include "tvcap/modsynth.hpp"

namespace tvcap {

using constants::pi;
using constants::speed_of_light;
using constants::vacuum_impedance;

void PlaneWaveSource::validate() const {
  require(std::isfinite(omega) && omega > 0.0, Errc::invalid_argument, "omega must be positive");
  require(std::isfinite(E0) && E0 >= 0.0, Errc::invalid_argument, "E0 must be >= 0");
  require(std::isfinite(E_DC) && E_DC > E0, Errc::voltage_crosses_zero,
          "E_DC must exceed E0 so the incident field never vanishes");
}

double PlaneWaveSource::operator()(double t) const { return E_DC + E0 * std::sin(omega * t); }
double PlaneWaveSource::period() const { return 2.0 * pi / omega; }
double PlaneWaveSource::wavelength() const { return speed_of_light * period(); }
HarmonicSignal PlaneWaveSource::harmonic() const { return HarmonicSignal{E_DC, E0, omega, -0.5 * pi}; }
double PlaneWaveSource::integral(double t) const { return E_DC * t + E0 * (1.0 - std::cos(omega * t)) / omega; }

std::string_view to_string(SheetVariant v) {
  switch (v) {
    case SheetVariant::two_patch_arrays: return "two-patch-arrays";
    case SheetVariant::patches_on_substrate: return "patches-on-substrate";
    case SheetVariant::two_dielectric_slabs: return "two-dielectric-slabs";
  }
  return "?";
}

SheetVariant sheet_variant_from_string(std::string_view s) {
  if (s == "two-patch-arrays" || s == "a") return SheetVariant::two_patch_arrays;
  if (s == "patches-on-substrate" || s == "b") return SheetVariant::patches_on_substrate;
  if (s == "two-dielectric-slabs" || s == "c") return SheetVariant::two_dielectric_slabs;
  fail(Errc::invalid_argument, "unknown sheet variant '" + std::string(s) + "'");
}

double effective_sheet_capacitance(double eps_r, double d) {
  return (eps_r - 1.0) * d / (vacuum_impedance * speed_of_light);
}

double eps_r_for_capacitance(double C, double d) {
  require(d > 0.0, Errc::invalid_argument, "thickness must be positive");
  return 1.0 + C * vacuum_impedance * speed_of_light / d;
}

double SheetSpec::thickness() const { return d > 0.0 ? d : source.wavelength() / 400.0; }
double SheetSpec::static_eps_r() const { return eps_r ? *eps_r : eps_r_for_capacitance(C0, thickness()); }
double SheetSpec::modulation_c1() const { return c1 ? *c1 : 7.0 * C0; }
double SheetSpec::modulation_c2() const { return c2 ? *c2 : 14.0 * modulation_c1(); }

void SheetSpec::validate() const {
  source.validate();
  require(std::isfinite(C0) && C0 >= 0.0, Errc::invalid_argument, "C0 must be >= 0");
  if (R0) require(std::isfinite(*R0) && *R0 > 0.0, Errc::nonpositive_resistance, "R0 must be positive");
  require(std::isfinite(d) && d >= 0.0, Errc::invalid_argument, "d must be >= 0");
  const double lambda = source.wavelength();
  require(thickness() <= lambda / 100.0 * (1.0 + 1e-12), Errc::invalid_argument,
          "layer thickness must stay below wavelength / 100");
  if (variant != SheetVariant::two_patch_arrays && eps_r) {
    const double c_eff = effective_sheet_capacitance(*eps_r, thickness());
    require(std::abs(c_eff - C0) <= 1e-3 * C0, Errc::invalid_argument,
            "slab capacitance (eps_r - 1) d / (eta0 c0) = " + std::to_string(c_eff) +
                " F differs from C0 by more than 0.1%");
  }
  require(modulation_c1() > 0.0, Errc::invalid_argument, "c1 must be positive");
  require(std::isfinite(modulation_c2()), Errc::invalid_argument, "c2 must be finite");
  require(samples_per_period >= 20.0 && std::floor(samples_per_period) == samples_per_period, Errc::invalid_argument,
          "samples_per_period must be an integer >= 20");
}

Waveform SensorModulation::total() const {
  std::vector<double> out(C_C.values());
  if (C_R) {
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += (*C_R)[n];
  }
  return Waveform(C_C.t0(), C_C.dt(), std::move(out), "F");
}

namespace {

double crossing_time(const PlaneWaveSource& src, double target) {
  if (target <= 0.0) return 0.0;
  // integral(t) >= (E_DC - E0) t brackets the root
  double lo = 0.0;
  double hi = target / (src.E_DC - src.E0);
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (src.integral(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

SensorModulation synth_sensor_modulation(const PlaneWaveSource& src, double C0, std::optional<double> R0,
                                         std::optional<double> c1, std::optional<double> c2, double t0, double dt,
                                         std::size_t n) {
  src.validate();
  require(C0 > 0.0, Errc::invalid_argument, "C0 must be positive");
  const double k1 = c1 ? *c1 : 7.0 * C0;
  const double k2 = c2 ? *c2 : 14.0 * k1;
  const Waveform e_in = sample(src.harmonic(), t0, dt, n, "V/m");

  SynthOptions opts;
  opts.require_positive = false;
  opts.constant = k1;
  Waveform c_c = synth_capacitance(e_in, -C0, opts).capacitance;
  require(c_c.min() >= -1e-9 * C0, Errc::positivity_violated,
          "C_C = c1/E_in - C0 goes negative; c1 must be at least C0 (E_DC + E0)");

  SensorModulation out{std::move(c_c), std::nullopt, k1, k2, std::numeric_limits<double>::infinity()};
  if (R0) {
    opts.constant = k2;
    out.C_R = synth_resistance(e_in, -*R0, opts).capacitance;
    out.stop_time = t0 + crossing_time(src, k2 * *R0);
  }
  return out;
}

double sheet_stop_time(const SheetSpec& spec) {
  spec.validate();
  if (!spec.R0) return std::numeric_limits<double>::infinity();
  return 0.9 * crossing_time(spec.source, spec.modulation_c2() * *spec.R0);
}

double FieldProbeRecord::invisibility_residual(double t_from) const {
  double worst = 0.0;
  for (std::size_t n = E_above.index_at_or_after(t_from); n < E_above.size(); ++n) {
    worst = std::max(worst, std::abs(E_above[n] - E_incident_above[n]));
    worst = std::max(worst, std::abs(E_below[n] - E_incident_below[n]));
  }
  return worst;
}

double FieldProbeRecord::reflection_magnitude(double t_from, double E0) const {
  require(E0 > 0.0, Errc::invalid_argument, "E0 must be positive");
  std::vector<double> scat(E_above.size());
  for (std::size_t n = 0; n < scat.size(); ++n) scat[n] = E_above[n] - E_incident_above[n];
  const Waveform w(E_above.t0(), E_above.dt(), std::move(scat), E_above.unit());
  return fit_harmonic(w, 2.0 * pi / period, t_from).phasor.amplitude / E0;
}

FieldProbeRecord simulate_sheet(const SheetSpec& spec, double t_end, bool modulation_on) {
  spec.validate();
  const PlaneWaveSource& src = spec.source;
  const double T = src.period();
  const auto spp = static_cast<std::size_t>(spec.samples_per_period);
  const double dt = T / static_cast<double>(spp);
  require(std::isfinite(t_end) && t_end > 0.0, Errc::invalid_argument, "t_end must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  require(steps >= 2, Errc::invalid_argument, "t_end is shorter than two steps");
  if (modulation_on) {
    const double stop = sheet_stop_time(spec);
    require(t_end <= stop * (1.0 + 1e-12), Errc::positivity_violated,
            "t_end exceeds 90% of the time at which C_R(t) reaches zero (" + std::to_string(stop) + " s allowed)");
  }

  // modulation on the half-step grid so RK4 sees exact midpoint values
  std::vector<double> c_tv(2 * steps + 1, 0.0);
  if (modulation_on) {
    const SensorModulation m =
        synth_sensor_modulation(src, spec.C0, spec.R0, spec.modulation_c1(), spec.modulation_c2(), 0.0, 0.5 * dt,
                                2 * steps + 1);
    const Waveform tot = m.total();
    require(tot.min() >= 0.0, Errc::positivity_violated, "C_C + C_R goes negative inside the run");
    c_tv = tot.values();
  }

  const double y0 = 2.0 / vacuum_impedance;
  const double g = y0 + (spec.R0 ? 1.0 / *spec.R0 : 0.0);
  auto c_tot = [&](std::size_t half) { return spec.C0 + c_tv[half]; };
  auto rhs = [&](double t, double q, double c) { return y0 * src(t) - g * q / c; };

  std::vector<double> e(steps + 1);
  const double c_min = spec.C0 + *std::min_element(c_tv.begin(), c_tv.end());
  if (c_min == 0.0 && !modulation_on) {
    // no capacitance at all: a plain conductance, E follows E_in without delay
    for (std::size_t n = 0; n <= steps; ++n) e[n] = y0 * src(static_cast<double>(n) * dt) / g;
  } else {
    // explicit RK4 is stable for dt g / C up to about 2.78
    require(dt * g / c_min < 2.5, Errc::grid_too_coarse,
            "sheet time constant C / (2/eta0 + 1/R0) is too short for samples_per_period");
    double q = c_tot(0) * src(0.0);
    e[0] = q / c_tot(0);
    for (std::size_t n = 0; n < steps; ++n) {
      const double t = static_cast<double>(n) * dt;
      const double ca = c_tot(2 * n);
      const double cm = c_tot(2 * n + 1);
      const double cb = c_tot(2 * n + 2);
      const double k1 = rhs(t, q, ca);
      const double k2 = rhs(t + 0.5 * dt, q + 0.5 * dt * k1, cm);
      const double k3 = rhs(t + 0.5 * dt, q + 0.5 * dt * k2, cm);
      const double k4 = rhs(t + dt, q + dt * k3, cb);
      q += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      require(std::isfinite(q), Errc::invalid_argument, "sheet model produced a non-finite field");
      e[n + 1] = q / cb;
    }
  }

  const double delay = src.wavelength() / speed_of_light;  // one period
  std::vector<double> above(steps + 1), below(steps + 1), inc_above(steps + 1), inc_below(steps + 1);
  std::vector<double> j_tot(steps + 1), ctv_e(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    const double scat = n >= spp ? e[n - spp] - src(static_cast<double>(n - spp) * dt) : 0.0;
    inc_above[n] = src(t + delay);
    inc_below[n] = src(t - delay);
    above[n] = inc_above[n] + scat;
    below[n] = inc_below[n] + scat;
    j_tot[n] = y0 * (src(t) - e[n]);
    ctv_e[n] = c_tv[2 * n] * e[n];
  }

  const Waveform j_tv_w = derivative(Waveform(0.0, dt, std::move(ctv_e), "C/m^2"));
  std::vector<double> j_st(steps + 1), p_st(steps + 1), j_tv(j_tv_w.values()), p_tv(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) {
    j_st[n] = j_tot[n] - j_tv[n];
    p_st[n] = e[n] * j_st[n];
    p_tv[n] = e[n] * j_tv[n];
  }

  auto wf = [&](std::vector<double> v, const char* unit) { return Waveform(0.0, dt, std::move(v), unit); };
  FieldProbeRecord rec{"sheet",
                       wf(std::move(above), "V/m"),
                       wf(std::move(below), "V/m"),
                       wf(std::move(inc_above), "V/m"),
                       wf(std::move(inc_below), "V/m"),
                       {},
                       T,
                       modulation_on};
  rec.layers.push_back({"static", wf(std::move(j_st), "A/m"), wf(std::move(p_st), "W/m^2")});
  rec.layers.push_back({"time-varying", wf(std::move(j_tv), "A/m"), wf(std::move(p_tv), "W/m^2")});
  return rec;
}

double PowerReport::relative_net() const { return p_static != 0.0 ? std::abs(net) / std::abs(p_static) : 0.0; }

namespace {

struct Average {
  double value;
  std::size_t periods;
};

Average period_average(const Waveform& p, double period, double settle) {
  const double spp_f = period / p.dt();
  const auto spp = static_cast<std::size_t>(std::llround(spp_f));
  require(spp >= 2 && std::abs(spp_f - static_cast<double>(spp)) < 1e-6 * spp_f, Errc::invalid_argument,
          "power trace step must divide the period");
  const std::size_t first = p.index_at_or_after(settle);
  require(first < p.size(), Errc::window_too_short, "record ends before the settle time");
  const std::size_t periods = (p.size() - first) / spp;
  require(periods >= 3, Errc::window_too_short, "record must span settle + 3 periods");
  double sum = 0.0;
  for (std::size_t n = first; n < first + periods * spp; ++n) sum += p[n];
  return {sum / static_cast<double>(periods * spp), periods};
}

}  // namespace

PowerReport power_balance(const FieldProbeRecord& rec, double settle) {
  require(rec.layers.size() == 2, Errc::invalid_argument, "record must carry static and time-varying layers");
  const Average st = period_average(rec.layers[0].p, rec.period, settle);
  const Average tv = period_average(rec.layers[1].p, rec.period, settle);
  PowerReport r;
  r.p_static = st.value;
  r.p_tv = tv.value;
  r.net = st.value + tv.value;
  r.periods = std::min(st.periods, tv.periods);
  return r;
}

std::complex<double> static_reflection(const SheetSpec& spec) {
  spec.validate();
  using namespace std::complex_literals;
  const std::complex<double> y = 1i * spec.source.omega * spec.C0 + (spec.R0 ? 1.0 / *spec.R0 : 0.0);
  const std::complex<double> x = 0.5 * vacuum_impedance * y;
  return -x / (1.0 + x);
}

VariantComparison compare_variants(const std::array<SheetSpec, 3>& specs, double t_end, bool modulation_on,
                                   double settle) {
  const SheetSpec& ref = specs[0];
  for (const SheetSpec& s : specs) {
    const bool same = s.source.E_DC == ref.source.E_DC && s.source.E0 == ref.source.E0 &&
                      s.source.omega == ref.source.omega && s.C0 == ref.C0 && s.R0 == ref.R0 &&
                      s.modulation_c1() == ref.modulation_c1() && s.modulation_c2() == ref.modulation_c2();
    require(same, Errc::mismatched_sources, "variants must share source, sheet parameters and modulation");
  }
  std::vector<FieldProbeRecord> recs;
  VariantComparison out;
  for (std::size_t k = 0; k < 3; ++k) {
    out.names[k] = std::string(to_string(specs[k].variant));
    recs.push_back(specs[k].variant == SheetVariant::two_dielectric_slabs
                       ? simulate_fdtd(specs[k], t_end, modulation_on)
                       : simulate_sheet(specs[k], t_end, modulation_on));
  }
  const std::array<std::pair<int, int>, 3> pairs{{{0, 1}, {0, 2}, {1, 2}}};
  for (std::size_t p = 0; p < 3; ++p) {
    const FieldProbeRecord& a = recs[static_cast<std::size_t>(pairs[p].first)];
    const FieldProbeRecord& b = recs[static_cast<std::size_t>(pairs[p].second)];
    double worst = 0.0;
    for (std::size_t n = a.E_above.index_at_or_after(settle); n < a.E_above.size(); ++n) {
      const double t = a.E_above.time(n);
      if (t > b.E_above.end_time()) break;
      worst = std::max(worst, std::abs(a.E_above[n] - b.E_above.at(t)));
      worst = std::max(worst, std::abs(a.E_below[n] - b.E_below.at(t)));
    }
    out.max_difference[p] = worst;
  }
  return out;
}

}  // namespace tvcap
