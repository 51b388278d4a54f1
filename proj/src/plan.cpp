#include "plan.hpp"

#include <cmath>
#include <limits>

#include "tvcap/constants.hpp"
#include "tvcap/error.hpp"

namespace tvcap::cli::plan {

namespace {

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }

const Json& field(const Json& j, const std::string& key, const std::string& where) {
  require(j.is_object(), Errc::validation_error, where + " must be an object");
  const auto it = j.find(key);
  require(it != j.end(), Errc::validation_error, "missing key " + join(where, key));
  return *it;
}

}  // namespace

double number(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  require(v.is_number(), Errc::validation_error, join(where, key) + " must be a number");
  const double x = v.get<double>();
  require(std::isfinite(x), Errc::validation_error, join(where, key) + " must be finite");
  return x;
}

std::optional<double> optional_number(const Json& j, const std::string& key, const std::string& where) {
  if (field(j, key, where).is_null()) return std::nullopt;
  return number(j, key, where);
}

std::string text(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  require(v.is_string(), Errc::validation_error, join(where, key) + " must be a string");
  return v.get<std::string>();
}

bool flag(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  require(v.is_boolean(), Errc::validation_error, join(where, key) + " must be true or false");
  return v.get<bool>();
}

std::size_t count(const Json& j, const std::string& key, const std::string& where) {
  const Json& v = field(j, key, where);
  require(v.is_number_integer() && v.get<long long>() >= 0, Errc::validation_error,
          join(where, key) + " must be a non-negative integer");
  return static_cast<std::size_t>(v.get<long long>());
}

Json merged(const Json& defaults, const Json& given, const std::string& where) {
  require(given.is_object(), Errc::validation_error, (where.empty() ? "scenario" : where) + " must be an object");
  Json out = defaults;
  for (const auto& [key, value] : given.items()) {
    const std::string path = join(where, key);
    const auto it = out.find(key);
    require(it != out.end(), Errc::validation_error, "unknown key " + path);
    if (it->is_object()) {
      *it = merged(*it, value, path);
    } else {
      *it = value;
    }
  }
  return out;
}

Json circuit_block_defaults() {
  return Json{{"source", {{"dc_V", 6.0}, {"amplitude_V", 1.0}, {"frequency_Hz", 1e6}, {"phase_rad", 0.0}}},
              {"R_s_ohm", 10.0},
              {"target", nullptr},
              {"synthesis",
               {{"constant", nullptr},
                {"margin_F", nullptr},
                {"voltage_mode", "external"},
                {"feedback_cutoff_Hz", nullptr}}},
              {"periods", 20},
              {"settle_periods", 5},
              {"samples_per_period", 2000},
              {"initial_charge", "dc-steady-state"}};
}

Json stability_block_defaults() {
  return Json{{"cases", Json::array()}, {"transients", Json::array()}, {"simulate_periods", 50},
              {"samples_per_period", 1000}};
}

Json stability_case_defaults() {
  return Json{{"name", ""},
              {"R_s_ohm", 10.0},
              {"R_C_ohm", nullptr},
              {"source", {{"dc_V", 6.0}, {"amplitude_V", 1.0}, {"frequency_Hz", 1e6}, {"phase_rad", 0.0}}},
              {"profile", nullptr}};
}

Json transient_case_defaults() {
  return Json{{"name", ""}, {"R_ohm", 10.0}, {"C0_F", -1e-9}, {"span_s", 2e-7}, {"steps", 2000}, {"q0_C", 1e-12}};
}

Json sheet_block_defaults() {
  return Json{{"C0_F", 1e-14},
              {"R0_ohm", 1000.0},
              {"variant", "two-patch-arrays"},
              {"d_m", nullptr},
              {"d_scale", 1.0},
              {"eps_r", nullptr},
              {"source", {{"E_DC_V_per_m", 4.0}, {"E0_V_per_m", 1.0}, {"frequency_Hz", 1e11}}},
              {"c1_F_V_per_m", nullptr},
              {"c2_F_V_per_m", nullptr},
              {"samples_per_period", 1000}};
}

Json fdtd_block_defaults() {
  const FdtdOptions o;
  return Json{{"cells_per_slab", o.cells_per_slab},
              {"courant", o.courant},
              {"margin_cells", o.margin_cells},
              {"modulation_plane_d", o.modulation_plane},
              {"time_varying_on_top", o.time_varying_on_top}};
}

Json check_defaults() {
  return Json{{"name", ""},         {"metric", ""},        {"max", nullptr},      {"min", nullptr},
              {"equals", nullptr},  {"target", nullptr},   {"tol", nullptr},      {"rel_tol", nullptr},
              {"monotone", nullptr}, {"expect_fail", false}, {"expect_fail_if", nullptr}};
}

HarmonicSignal harmonic_source(const Json& src, const std::string& where) {
  HarmonicSignal h;
  h.dc = number(src, "dc_V", where);
  h.amplitude = number(src, "amplitude_V", where);
  const double f = number(src, "frequency_Hz", where);
  require(f > 0.0, Errc::validation_error, where + ".frequency_Hz must be positive");
  h.omega = 2.0 * constants::pi * f;
  h.phase = number(src, "phase_rad", where);
  h.validate();
  return h;
}

namespace {

AdmittanceKernel parse_kernel(const Json& t, const std::string& where) {
  AdmittanceKernel k;
  k.g0 = t.contains("g0_S") ? number(t, "g0_S", where) : 0.0;
  k.c0 = t.contains("c0_F") ? number(t, "c0_F", where) : 0.0;
  if (t.contains("smooth") && !t.at("smooth").is_null()) {
    const std::string sw = where + ".smooth";
    const Json& s = t.at("smooth");
    const std::string shape = text(s, "shape", sw);
    const double dg = number(s, "dgamma_s", sw);
    require(dg > 0.0, Errc::validation_error, sw + ".dgamma_s must be positive");
    std::vector<double> values;
    if (shape == "exponential") {
      for (const auto& [key, _] : s.items()) {
        require(key == "shape" || key == "dgamma_s" || key == "amplitude_S_per_s" || key == "tau_s" ||
                    key == "span_s",
                Errc::validation_error, "unknown key " + sw + "." + key);
      }
      const double a = number(s, "amplitude_S_per_s", sw);
      const double tau = number(s, "tau_s", sw);
      const double span = number(s, "span_s", sw);
      require(tau > 0.0 && span > 0.0, Errc::validation_error, sw + ": tau_s and span_s must be positive");
      const auto n = static_cast<std::size_t>(std::llround(span / dg)) + 1;
      require(n >= 2, Errc::validation_error, sw + ": span_s must cover at least one dgamma_s");
      for (std::size_t m = 0; m < n; ++m) values.push_back(a * std::exp(-static_cast<double>(m) * dg / tau));
    } else if (shape == "samples") {
      for (const auto& [key, _] : s.items()) {
        require(key == "shape" || key == "dgamma_s" || key == "values", Errc::validation_error,
                "unknown key " + sw + "." + key);
      }
      const Json& v = field(s, "values", sw);
      require(v.is_array(), Errc::validation_error, sw + ".values must be an array");
      for (const Json& x : v) {
        require(x.is_number(), Errc::validation_error, sw + ".values must hold numbers");
        values.push_back(x.get<double>());
      }
    } else {
      fail(Errc::validation_error, sw + ".shape must be 'exponential' or 'samples'");
    }
    k.smooth = Waveform(0.0, dg, std::move(values), "S/s");
  }
  k.validate();
  return k;
}

void only_keys(const Json& t, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [key, _] : t.items()) {
    bool ok = false;
    for (const char* k : keys) ok |= key == k;
    require(ok, Errc::validation_error, "unknown key " + where + "." + key);
  }
}

}  // namespace

CircuitPlan circuit_plan(const Json& c, const std::string& where) {
  CircuitPlan p;
  p.source = harmonic_source(field(c, "source", where), where + ".source");
  p.R_s = number(c, "R_s_ohm", where);
  require(p.R_s > 0.0, Errc::validation_error, where + ".R_s_ohm must be positive");

  const std::string tw = where + ".target";
  const Json& t = field(c, "target", where);
  require(t.is_object(), Errc::validation_error, tw + " must be an object with a 'type'");
  const std::string type = text(t, "type", tw);
  if (type == "capacitance") {
    only_keys(t, {"type", "C_eq_F"}, tw);
    p.target = CapacitanceTarget{number(t, "C_eq_F", tw)};
  } else if (type == "resistance") {
    only_keys(t, {"type", "R_eq_ohm"}, tw);
    const double r = number(t, "R_eq_ohm", tw);
    require(r != 0.0, Errc::validation_error, tw + ".R_eq_ohm = 0: the resistance modulation divides by R_eq");
    p.target = ResistanceTarget{r};
  } else if (type == "lossy-inductance") {
    only_keys(t, {"type", "L_eq_H", "R_L_ohm", "R_C_ohm"}, tw);
    const double r_l = number(t, "R_L_ohm", tw);
    require(r_l != 0.0, Errc::validation_error,
            tw + ".R_L_ohm = 0: the lossy-inductance modulation divides by R_L (terms c1/R_L, L_eq/R_L, 1/R_L)");
    const std::optional<double> r_c = optional_number(t, "R_C_ohm", tw);
    if (r_c) {
      require(*r_c != 0.0, Errc::validation_error, tw + ".R_C_ohm = 0: the modulation divides by R_C");
    }
    p.target = LossyInductanceTarget{number(t, "L_eq_H", tw), r_l,
                                     r_c ? *r_c : std::numeric_limits<double>::infinity()};
    p.branch_R_C = r_c;
  } else if (type == "general") {
    only_keys(t, {"type", "g0_S", "c0_F", "smooth"}, tw);
    p.target = GeneralTarget{parse_kernel(t, tw)};
  } else {
    fail(Errc::validation_error,
         tw + ".type must be capacitance, resistance, lossy-inductance or general (got '" + type + "')");
  }

  const std::string sw = where + ".synthesis";
  const Json& s = field(c, "synthesis", where);
  p.synth.constant = optional_number(s, "constant", sw);
  p.synth.margin = optional_number(s, "margin_F", sw);
  if (p.synth.margin) require(*p.synth.margin > 0.0, Errc::validation_error, sw + ".margin_F must be positive");
  const std::string mode = text(s, "voltage_mode", sw);
  if (mode == "external") {
    p.synth.voltage_mode = VoltageMode::external_steady_state;
  } else if (mode == "filtered") {
    p.synth.voltage_mode = VoltageMode::filtered_feedback;
  } else {
    fail(Errc::validation_error, sw + ".voltage_mode must be 'external' or 'filtered'");
  }
  const std::optional<double> fc = optional_number(s, "feedback_cutoff_Hz", sw);
  p.feedback_cutoff = fc ? *fc : 3.0 * p.source.frequency();
  require(p.feedback_cutoff > 0.0, Errc::validation_error, sw + ".feedback_cutoff_Hz must be positive");
  if (p.synth.constant && std::holds_alternative<LossyInductanceTarget>(p.target)) {
    p.inductance.c1 = 0.0;
    p.inductance.c2 = *p.synth.constant;
  }

  p.periods = count(c, "periods", where);
  p.settle_periods = count(c, "settle_periods", where);
  p.samples_per_period = count(c, "samples_per_period", where);
  require(p.samples_per_period >= 20, Errc::validation_error, where + ".samples_per_period must be >= 20");
  require(p.periods >= p.settle_periods + 3, Errc::validation_error,
          where + ": periods must exceed settle_periods by at least 3");
  const std::string ic = text(c, "initial_charge", where);
  if (ic == "on-trajectory") {
    p.on_trajectory = true;
  } else if (ic == "dc-steady-state") {
    p.initial = InitialCharge::dc_steady_state;
  } else if (ic == "zero") {
    p.initial = InitialCharge::zero;
  } else {
    fail(Errc::validation_error, where + ".initial_charge must be 'on-trajectory', 'dc-steady-state' or 'zero'");
  }
  return p;
}

void validate(const CircuitPlan& p) {
  CircuitSpec spec{p.source, p.R_s, p.target};
  spec.validate();
  if (const auto* g = std::get_if<GeneralTarget>(&p.target); g && g->kernel.smooth) {
    resample_kernel(*g->kernel.smooth, p.dt());
    const std::size_t hist = g->kernel.history_samples(p.dt());
    require(hist + 3 * p.samples_per_period < p.periods * p.samples_per_period, Errc::validation_error,
            "kernel history is longer than the simulated span");
  }
  // the reference must exist (C_eq = 0 has no phasor reference, for instance)
  reference_current(p);
}

SteadyStateCurrent reference_current(const CircuitPlan& p) {
  if (const auto* g = std::get_if<GeneralTarget>(&p.target)) return kernel_steady_state(p.source, p.R_s, g->kernel);
  return equivalent_steady_state(CircuitSpec{p.source, p.R_s, p.target}, p.source.omega);
}

namespace {

ModulationProfile synth_on(const CircuitPlan& p, const Waveform& v, const Waveform* i, const SynthOptions& opts) {
  if (const auto* c = std::get_if<CapacitanceTarget>(&p.target)) return synth_capacitance(v, c->C_eq, opts);
  if (const auto* r = std::get_if<ResistanceTarget>(&p.target)) return synth_resistance(v, r->R_eq, opts);
  if (const auto* l = std::get_if<LossyInductanceTarget>(&p.target)) {
    require(i != nullptr, Errc::invalid_argument, "inductance synthesis needs the element current");
    return synth_inductance(v, *i, l->L_eq, l->R_L, l->R_C, p.inductance, opts);
  }
  if (const auto* g = std::get_if<GeneralTarget>(&p.target)) return synth_general(v, g->kernel, opts);
  fail(Errc::unsupported_target, "target not supported by the scenario runner");
}

}  // namespace

ModulationProfile synthesize_profile(const CircuitPlan& p, std::size_t periods) {
  const SteadyStateCurrent ref = reference_current(p);
  const HarmonicSignal v_el = expected_element_voltage(CircuitSpec{p.source, p.R_s, p.target}, ref);
  const std::size_t n = periods * p.samples_per_period + 1;
  const Waveform v = sample(v_el, 0.0, p.dt(), n, "V");
  const Waveform i = ref.sample_on(v, "A");
  SynthOptions opts = p.synth;
  opts.voltage_mode = VoltageMode::external_steady_state;
  return synth_on(p, v, &i, opts);
}

Emulation emulate(const CircuitPlan& p, std::size_t periods) {
  const SteadyStateCurrent ref = reference_current(p);
  const HarmonicSignal v_el = expected_element_voltage(CircuitSpec{p.source, p.R_s, p.target}, ref);
  const std::size_t n = periods * p.samples_per_period + 1;
  Waveform v = sample(v_el, 0.0, p.dt(), n, "V");
  ModulationProfile profile = synthesize_profile(p, periods);

  SimulationOptions so;
  so.initial = p.initial;
  auto run = [&](const ModulationProfile& prof) {
    if (p.on_trajectory) {
      so.initial = InitialCharge::explicit_value;
      so.q0 = prof.capacitance[0] * v[0];
    }
    const CircuitSpec spec{p.source, p.R_s, TvcBranch{prof.capacitance, p.branch_R_C}};
    return simulate_tvc(spec, prof.capacitance.end_time(), so);
  };
  SimulationTrace trace = run(profile);

  if (p.synth.voltage_mode == VoltageMode::filtered_feedback) {
    require(!trace.diverged, Errc::invalid_argument, "first pass diverged; no voltage to feed back");
    const Waveform v_f = lowpass(trace.v_cap, p.feedback_cutoff);
    const Waveform i_f = lowpass(trace.i, p.feedback_cutoff);
    SynthOptions opts = p.synth;
    profile = synth_on(p, v_f, &i_f, opts);
    v = v_f;
    trace = run(profile);
  }
  return Emulation{std::move(profile), std::move(trace), std::move(v)};
}

StabilityPlan stability_plan(const Json& st, const std::string& where) {
  StabilityPlan p;
  p.simulate_periods = count(st, "simulate_periods", where);
  p.samples_per_period = count(st, "samples_per_period", where);
  require(p.simulate_periods >= 1, Errc::validation_error, where + ".simulate_periods must be >= 1");
  require(p.samples_per_period >= 20, Errc::validation_error, where + ".samples_per_period must be >= 20");
  const Json& cases = field(st, "cases", where);
  require(cases.is_array(), Errc::validation_error, where + ".cases must be an array");
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const std::string cw = where + ".cases." + std::to_string(k);
    const Json c = merged(stability_case_defaults(), cases[k], cw);
    ProfileCase pc;
    pc.name = text(c, "name", cw);
    require(!pc.name.empty(), Errc::validation_error, cw + ".name must not be empty");
    pc.profile = field(c, "profile", cw);
    require(pc.profile.is_object(), Errc::validation_error, cw + ".profile must be an object with a 'type'");
    const std::string pw = cw + ".profile";
    const std::string type = text(pc.profile, "type", pw);
    if (type == "synthesized") {
      only_keys(pc.profile, {"type", "circuit"}, pw);
      const Json circ = merged(circuit_block_defaults(), field(pc.profile, "circuit", pw), pw + ".circuit");
      pc.profile["circuit"] = circ;
      const CircuitPlan cp = circuit_plan(circ, pw + ".circuit");
      validate(cp);
      pc.R_s = cp.R_s;
      pc.R_C = cp.branch_R_C;
      pc.source = cp.source;
    } else {
      pc.R_s = number(c, "R_s_ohm", cw);
      pc.R_C = optional_number(c, "R_C_ohm", cw);
      pc.source = harmonic_source(field(c, "source", cw), cw + ".source");
      if (type == "constant") {
        only_keys(pc.profile, {"type", "C_F"}, pw);
        require(number(pc.profile, "C_F", pw) != 0.0, Errc::validation_error, pw + ".C_F must be nonzero");
      } else if (type == "harmonic") {
        only_keys(pc.profile, {"type", "mean_F", "amplitude_F", "phase_rad"}, pw);
        number(pc.profile, "mean_F", pw);
        number(pc.profile, "amplitude_F", pw);
        if (pc.profile.contains("phase_rad")) number(pc.profile, "phase_rad", pw);
      } else {
        fail(Errc::validation_error, pw + ".type must be constant, harmonic or synthesized");
      }
    }
    require(pc.R_s > 0.0, Errc::validation_error, cw + ": R_s must be positive");
    if (pc.R_C) require(*pc.R_C != 0.0, Errc::validation_error, cw + ": R_C must be nonzero");
    p.cases.push_back(std::move(pc));
  }
  const Json& tr = field(st, "transients", where);
  require(tr.is_array(), Errc::validation_error, where + ".transients must be an array");
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const std::string tw = where + ".transients." + std::to_string(k);
    const Json t = merged(transient_case_defaults(), tr[k], tw);
    TransientCase tc;
    tc.name = text(t, "name", tw);
    require(!tc.name.empty(), Errc::validation_error, tw + ".name must not be empty");
    tc.R = number(t, "R_ohm", tw);
    tc.C0 = number(t, "C0_F", tw);
    tc.span = number(t, "span_s", tw);
    tc.steps = count(t, "steps", tw);
    tc.q0 = number(t, "q0_C", tw);
    require(tc.R > 0.0, Errc::validation_error, tw + ".R_ohm must be positive");
    require(tc.C0 != 0.0, Errc::validation_error, tw + ".C0_F must be nonzero");
    require(tc.span > 0.0 && tc.steps >= 10, Errc::validation_error, tw + ": span_s > 0 and steps >= 10 required");
    require(tc.q0 != 0.0, Errc::validation_error, tw + ".q0_C must be nonzero to seed the transient");
    p.transients.push_back(std::move(tc));
  }
  return p;
}

Waveform case_profile(const ProfileCase& c, std::size_t periods, std::size_t samples_per_period) {
  const std::string type = c.profile.at("type").get<std::string>();
  if (type == "synthesized") {
    const CircuitPlan cp = circuit_plan(c.profile.at("circuit"), c.name);
    CircuitPlan scaled = cp;
    scaled.samples_per_period = samples_per_period;
    return synthesize_profile(scaled, periods).capacitance;
  }
  const double dt = c.source.period() / static_cast<double>(samples_per_period);
  const std::size_t n = periods * samples_per_period + 1;
  std::vector<double> v(n);
  if (type == "constant") {
    std::fill(v.begin(), v.end(), c.profile.at("C_F").get<double>());
  } else {
    const double mean = c.profile.at("mean_F").get<double>();
    const double amp = c.profile.at("amplitude_F").get<double>();
    const double ph = c.profile.contains("phase_rad") ? c.profile.at("phase_rad").get<double>() : 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      v[k] = mean + amp * std::cos(c.source.omega * static_cast<double>(k) * dt + ph);
    }
  }
  return Waveform(0.0, dt, std::move(v), "F");
}

SheetSpec sheet_spec(const Json& s, const std::string& where) {
  SheetSpec spec;
  spec.C0 = number(s, "C0_F", where);
  spec.R0 = optional_number(s, "R0_ohm", where);
  const std::string variant = text(s, "variant", where);
  try {
    spec.variant = sheet_variant_from_string(variant);
  } catch (const Error&) {
    fail(Errc::validation_error,
         where + ".variant must be two-patch-arrays, patches-on-substrate or two-dielectric-slabs");
  }
  const std::string srcw = where + ".source";
  const Json& src = field(s, "source", where);
  spec.source.E_DC = number(src, "E_DC_V_per_m", srcw);
  spec.source.E0 = number(src, "E0_V_per_m", srcw);
  const double f = number(src, "frequency_Hz", srcw);
  require(f > 0.0, Errc::validation_error, srcw + ".frequency_Hz must be positive");
  spec.source.omega = 2.0 * constants::pi * f;
  const std::optional<double> d = optional_number(s, "d_m", where);
  const double scale = number(s, "d_scale", where);
  require(scale > 0.0, Errc::validation_error, where + ".d_scale must be positive");
  spec.d = d ? *d : scale * spec.source.wavelength() / 400.0;
  spec.eps_r = optional_number(s, "eps_r", where);
  spec.c1 = optional_number(s, "c1_F_V_per_m", where);
  spec.c2 = optional_number(s, "c2_F_V_per_m", where);
  spec.samples_per_period = static_cast<double>(count(s, "samples_per_period", where));
  spec.validate();
  return spec;
}

FdtdOptions fdtd_options(const Json& f, const std::string& where) {
  FdtdOptions o;
  o.cells_per_slab = count(f, "cells_per_slab", where);
  o.courant = number(f, "courant", where);
  o.margin_cells = count(f, "margin_cells", where);
  o.modulation_plane = number(f, "modulation_plane_d", where);
  o.time_varying_on_top = flag(f, "time_varying_on_top", where);
  require(o.cells_per_slab >= 20, Errc::grid_too_coarse, where + ".cells_per_slab must be >= 20");
  require(o.courant > 0.0 && o.courant <= 1.0, Errc::courant_violation, where + ".courant must lie in (0, 1]");
  require(o.margin_cells >= 4, Errc::validation_error, where + ".margin_cells must be >= 4");
  return o;
}

bool modulation_flag(const Json& doc) {
  const std::string m = text(doc, "modulation", "");
  require(m == "on" || m == "off", Errc::validation_error, "modulation must be 'on' or 'off'");
  return m == "on";
}

}  // namespace tvcap::cli::plan
