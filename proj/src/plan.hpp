#pragma once

// Scenario JSON -> module specs. Shared by validate_scenario and run_scenario.

#include <optional>
#include <string>
#include <vector>

#include "tvcap/circuitsim.hpp"
#include "tvcap/fdtd.hpp"
#include "tvcap/modsynth.hpp"
#include "tvcap/scenario.hpp"
#include "tvcap/sheetsim.hpp"

namespace tvcap::cli::plan {

// typed access with validation errors that name the JSON path
double number(const Json& j, const std::string& key, const std::string& where);
std::optional<double> optional_number(const Json& j, const std::string& key, const std::string& where);
std::string text(const Json& j, const std::string& key, const std::string& where);
bool flag(const Json& j, const std::string& key, const std::string& where);
std::size_t count(const Json& j, const std::string& key, const std::string& where);
// merges `given` onto `defaults`, rejecting unknown keys
Json merged(const Json& defaults, const Json& given, const std::string& where);

// default subtrees of the scenario kinds
Json circuit_block_defaults();
Json stability_block_defaults();
Json stability_case_defaults();
Json transient_case_defaults();
Json sheet_block_defaults();
Json fdtd_block_defaults();
Json check_defaults();

HarmonicSignal harmonic_source(const Json& src, const std::string& where);

struct CircuitPlan {
  HarmonicSignal source;
  double R_s = 0.0;
  TargetElement target;
  std::optional<double> branch_R_C;
  SynthOptions synth;
  InductanceConstants inductance;
  double feedback_cutoff = 0.0;  // Hz, filtered-feedback mode
  std::size_t periods = 0;
  std::size_t settle_periods = 0;
  std::size_t samples_per_period = 0;
  InitialCharge initial = InitialCharge::dc_steady_state;
  // start with q = C(0) v(0), on the designed trajectory (overrides `initial`)
  bool on_trajectory = false;

  double period() const { return source.period(); }
  double dt() const { return period() / static_cast<double>(samples_per_period); }
};

CircuitPlan circuit_plan(const Json& circuit, const std::string& where);
void validate(const CircuitPlan& p);

// Expected current through the ideal element (or kernel network).
SteadyStateCurrent reference_current(const CircuitPlan& p);

struct Emulation {
  ModulationProfile profile;
  SimulationTrace trace;
  Waveform v_drive;  // voltage the modulation was built from
};

// Synthesizes the profile from the expected element voltage and simulates the
// loaded branch. In filtered-feedback mode the profile is rebuilt once from the
// low-passed voltage measured in the first pass.
Emulation emulate(const CircuitPlan& p, std::size_t periods);
ModulationProfile synthesize_profile(const CircuitPlan& p, std::size_t periods);

struct ProfileCase {
  std::string name;
  double R_s = 0.0;
  std::optional<double> R_C;
  HarmonicSignal source;
  Json profile;
};

struct TransientCase {
  std::string name;
  double R = 0.0;
  double C0 = 0.0;
  double span = 0.0;
  std::size_t steps = 0;
  double q0 = 0.0;
};

struct StabilityPlan {
  std::vector<ProfileCase> cases;
  std::vector<TransientCase> transients;
  std::size_t simulate_periods = 0;
  std::size_t samples_per_period = 0;
};

StabilityPlan stability_plan(const Json& stability, const std::string& where);
// Profile of one case over `periods` source periods.
Waveform case_profile(const ProfileCase& c, std::size_t periods, std::size_t samples_per_period);

SheetSpec sheet_spec(const Json& sheet, const std::string& where);
FdtdOptions fdtd_options(const Json& fdtd, const std::string& where);
bool modulation_flag(const Json& doc);

}  // namespace tvcap::cli::plan
