#pragma once

#include <complex>
#include <optional>
#include <variant>
#include <vector>

#include "tvcap/modsynth.hpp"
#include "tvcap/signals.hpp"

namespace tvcap {

// Time-varying capacitor branch, optionally with a parallel loss resistor R_C.
struct TvcBranch {
  Waveform capacitance;  // F
  std::optional<double> R_C;
};

// Source v_s(t) with series resistance R_s driving either a time-varying
// capacitor branch or an ideal equivalent element.
struct CircuitSpec {
  HarmonicSignal source;
  double R_s = 1.0;
  std::variant<TvcBranch, TargetElement> branch;

  void validate() const;
};

enum class InitialCharge { dc_steady_state, zero, explicit_value };

struct SimulationOptions {
  InitialCharge initial = InitialCharge::dc_steady_state;
  double q0 = 0.0;  // used with InitialCharge::explicit_value
  // Ideal (non-realizable) profiles with C <= 0 are only accepted when this is off.
  bool require_positive_profile = true;
  double divergence_factor = 1e6;
};

struct SimulationTrace {
  Waveform q;      // C
  Waveform v_cap;  // V
  Waveform i;      // A, current into the branch (capacitor plus R_C)
  bool diverged = false;
  std::optional<double> divergence_time;
};

// RK4 on dq/dt = v_s/R_s - k(t) q / C(t), k = 1 + R_s/R_C (k = 1 without R_C).
// The step equals the profile step; C(t) at the half steps is interpolated linearly.
SimulationTrace simulate_tvc(const CircuitSpec& spec, double t_end, const SimulationOptions& opts = {});

// Current through an ideal element driven by the same source: DC + one AC phasor.
struct SteadyStateCurrent {
  double dc = 0.0;
  Phasor ac;

  double operator()(double t) const { return dc + ac.amplitude * std::cos(ac.omega * t + ac.phase); }
  Waveform sample_on(const Waveform& grid, const std::string& unit = "A") const;
};

SteadyStateCurrent equivalent_steady_state(const CircuitSpec& spec, double omega);

// Same reference for a network given by its admittance kernel: I = V Y / (1 + R_s Y).
SteadyStateCurrent kernel_steady_state(const HarmonicSignal& source, double R_s, const AdmittanceKernel& k);

// Voltage across the ideal element in steady state: v_s - R_s i.
HarmonicSignal expected_element_voltage(const CircuitSpec& spec, const SteadyStateCurrent& current);

struct EmulationReport {
  double rel_rms_error = 0.0;
  std::vector<double> per_period_error;
  double settle = 0.0;
  std::size_t periods = 0;
};

// Relative RMS difference between trace.i and the reference over whole periods after `settle`.
EmulationReport compare_emulation(const SimulationTrace& trace, const SteadyStateCurrent& reference, double settle);

}  // namespace tvcap
