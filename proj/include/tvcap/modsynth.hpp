#pragma once

#include <optional>
#include <string>
#include <variant>

#include "tvcap/kernels.hpp"
#include "tvcap/signals.hpp"

namespace tvcap {

enum class VoltageMode { external_steady_state, filtered_feedback };

std::string_view to_string(VoltageMode mode);

struct ModulationConstants {
  std::optional<double> beta;
  std::optional<double> c1;
  std::optional<double> c2;
};

// A synthesized capacitance C(t) and the constants used to build it.
struct ModulationProfile {
  Waveform capacitance;  // F (or F per square for sheets)
  ModulationConstants constants;
  std::string target;
  double positivity_margin = 0.0;  // 0 when positivity was not requested
  bool positivity_enforced = false;
  VoltageMode voltage_mode = VoltageMode::external_steady_state;

  double min_capacitance() const { return capacitance.min(); }
};

struct CapacitanceTarget {
  double C_eq = 0.0;
};
struct ResistanceTarget {
  double R_eq = 0.0;
};
struct LossyInductanceTarget {
  double L_eq = 0.0;
  double R_L = 0.0;
  double R_C = 0.0;
};
struct GeneralTarget {
  AdmittanceKernel kernel;
};
struct NonlinearTarget {
  AdmittanceKernel kernel;
  VolterraKernel2 kernel2;
};

using TargetElement =
    std::variant<CapacitanceTarget, ResistanceTarget, LossyInductanceTarget, GeneralTarget, NonlinearTarget>;

void validate(const TargetElement& target);
std::string describe(const TargetElement& target);

struct SynthOptions {
  // The free constant (c1, c2, or beta depending on the target); nullopt = choose it.
  std::optional<double> constant;
  // Required min C(t); nullopt = default rule (10% of |C_eq| or of |median raw profile|).
  std::optional<double> margin;
  // Check (and, with an automatic constant, guarantee) min C(t) >= margin.
  bool require_positive = true;
  // |v| below v_floor_rel * max|v| counts as a zero crossing.
  double v_floor_rel = 1e-6;
  VoltageMode voltage_mode = VoltageMode::external_steady_state;
};

// C(t) = c1 / v(t) + C_eq
ModulationProfile synth_capacitance(const Waveform& v, double C_eq, const SynthOptions& opts = {});

// C(t) = c2 / v(t) + (1 / (R_eq v(t))) * integral v
ModulationProfile synth_resistance(const Waveform& v, double R_eq, const SynthOptions& opts = {});

struct InductanceConstants {
  std::optional<double> c1;  // C*Ohm
  std::optional<double> c2;  // C
};

// C(t) = (c1/R_L + c2)/v - (L_eq/R_L) i/v + (1/R_L - 1/R_C) (integral v)/v
ModulationProfile synth_inductance(const Waveform& v, const Waveform& i, double L_eq, double R_L, double R_C,
                                   const InductanceConstants& constants = {}, const SynthOptions& opts = {});

// C(t) = (beta + Q(t)) / v(t), Q the running charge of the target network:
// Q = c0 v(t) + g0 integral v + integral (smooth * v).
// The delta' part contributes its exact antiderivative c0 v(t).
ModulationProfile synth_general(const Waveform& v, const AdmittanceKernel& k, const SynthOptions& opts = {});

ModulationProfile synth_nonlinear(const Waveform& v, const AdmittanceKernel& k1, const VolterraKernel2& k2,
                                  const SynthOptions& opts = {});

// Smallest constant k with min_t (k / v + raw) == margin over the grid.
double select_constant_for_positivity(const Waveform& raw, const Waveform& v, double margin);

// Checks |v| stays above the floor with one sign. Returns the sign (+1 / -1).
int require_nonvanishing(const Waveform& v, double v_floor_rel = 1e-6);

// Current the synthesized capacitor draws from v: d/dt [C v] on the profile grid.
Waveform capacitor_current(const ModulationProfile& profile, const Waveform& v);

}  // namespace tvcap
