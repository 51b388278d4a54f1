#pragma once

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "tvcap/signals.hpp"

namespace tvcap {

// E_in(t) = E_DC + E0 sin(omega t), normal incidence from z > 0.
struct PlaneWaveSource {
  double E_DC = 4.0;   // V/m
  double E0 = 1.0;     // V/m
  double omega = 0.0;  // rad/s

  void validate() const;
  double operator()(double t) const;
  double period() const;
  double wavelength() const;
  HarmonicSignal harmonic() const;
  // Running integral of E_in from 0 to t, closed form.
  double integral(double t) const;
};

enum class SheetVariant { two_patch_arrays, patches_on_substrate, two_dielectric_slabs };

std::string_view to_string(SheetVariant v);
SheetVariant sheet_variant_from_string(std::string_view s);

struct SheetSpec {
  double C0 = 10e-15;         // F per square
  std::optional<double> R0;   // ohm per square; nullopt = no absorber
  SheetVariant variant = SheetVariant::two_patch_arrays;
  double d = 0.0;             // m; 0 = wavelength / 400
  std::optional<double> eps_r;  // static slab; nullopt = derived from C0 and d
  PlaneWaveSource source;
  std::optional<double> c1;   // F V/m; nullopt = 7 V/m * C0
  std::optional<double> c2;   // F V/m; nullopt = 14 c1
  double samples_per_period = 1000.0;

  void validate() const;
  double thickness() const;
  double static_eps_r() const;
  double modulation_c1() const;
  double modulation_c2() const;
};

// (eps_r - 1) d / (eta0 c0)
double effective_sheet_capacitance(double eps_r, double d);
// Inverse: eps_r with C_eff(eps_r, d) == C.
double eps_r_for_capacitance(double C, double d);

struct SensorModulation {
  Waveform C_C;                // F
  std::optional<Waveform> C_R;  // F; absent without an absorber
  double c1 = 0.0;
  double c2 = 0.0;
  // First time C_R reaches zero (infinite without an absorber).
  double stop_time = 0.0;

  Waveform total() const;  // C_C + C_R
};

// C_C = c1 / E_in - C0 and C_R = resistance emulation of -R0 driven by E_in,
// sampled on [t0, t0 + (n - 1) dt].
SensorModulation synth_sensor_modulation(const PlaneWaveSource& src, double C0, std::optional<double> R0,
                                         std::optional<double> c1, std::optional<double> c2, double t0, double dt,
                                         std::size_t n);

struct LayerTrace {
  std::string name;
  Waveform J;  // A/m
  Waveform p;  // W/m^2
};

struct FieldProbeRecord {
  std::string model;            // "sheet" or "fdtd"
  Waveform E_above;             // total field at +wavelength
  Waveform E_below;             // total field at -wavelength
  Waveform E_incident_above;
  Waveform E_incident_below;
  std::vector<LayerTrace> layers;  // [0] static (C0 and R0), [1] time-varying
  double period = 0.0;
  bool modulation_on = false;

  // max |E - E_incident| over both probes for t >= t_from
  double invisibility_residual(double t_from) const;
  // AC amplitude of the reflected field at +wavelength over E0.
  double reflection_magnitude(double t_from, double E0) const;
};

// Zero-thickness model: q = C_tot E, dq/dt = (2/eta0) E_in - (2/eta0 + 1/R0) E.
// Starts from the incident field (no scattered field before t = 0).
FieldProbeRecord simulate_sheet(const SheetSpec& spec, double t_end, bool modulation_on);

// Latest end time allowed with modulation on: 90% of the C_R zero crossing.
double sheet_stop_time(const SheetSpec& spec);

struct PowerReport {
  double p_static = 0.0;  // W/m^2, time average into C0 and R0
  double p_tv = 0.0;      // time-varying layer, signed
  double net = 0.0;
  std::size_t periods = 0;

  double relative_net() const;  // |net| / |p_static|
};

PowerReport power_balance(const FieldProbeRecord& rec, double settle);

// Phasor reflection coefficient of the static sheet C0 || R0.
std::complex<double> static_reflection(const SheetSpec& spec);

struct VariantComparison {
  std::array<std::string, 3> names;
  // max |difference| of E_above and E_below for the pairs (a,b), (a,c), (b,c), t >= settle
  std::array<double, 3> max_difference{};
};

// Variants (a) and (b) use the sheet model; (c) uses the 1D FDTD.
VariantComparison compare_variants(const std::array<SheetSpec, 3>& specs, double t_end, bool modulation_on,
                                   double settle);

}  // namespace tvcap
