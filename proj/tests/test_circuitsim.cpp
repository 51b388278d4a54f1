#include <cmath>

#include "doctest.h"
#include "tvcap/circuitsim.hpp"
#include "tvcap/constants.hpp"
#include "tvcap/error.hpp"
#include "tvcap/modsynth.hpp"

using namespace tvcap;
using constants::pi;

namespace {

const double kOmega = 2.0 * pi * 1e6;
const double kDt = 1e-6 / 2000;
const HarmonicSignal kSource{6.0, 1.0, kOmega, 0.0};
const HarmonicSignal kQuiet{0.0, 0.0, kOmega, 0.0};

Waveform flat(double c, double span, double dt = kDt) {
  return Waveform(0.0, dt, std::vector<double>(static_cast<std::size_t>(std::llround(span / dt)) + 1, c), "F");
}

template <class F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error raised");
  return Errc::invalid_argument;
}

}  // namespace

TEST_CASE("constant capacitor in steady state") {
  const CircuitSpec spec{kSource, 10.0, TvcBranch{flat(1e-9, 10e-6), std::nullopt}};
  const SimulationTrace tr = simulate_tvc(spec, 10e-6);
  CHECK_FALSE(tr.diverged);
  const Phasor p = steady_state_phasor(tr.i, kOmega, 5e-6);
  const double want = 1.0 / std::abs(std::complex<double>(10.0, -1.0 / (kOmega * 1e-9)));
  CHECK(want == doctest::Approx(6.27e-3).epsilon(1e-3));
  CHECK(p.amplitude == doctest::Approx(want).epsilon(1e-6));
  CHECK(p.phase * 180.0 / pi == doctest::Approx(86.4).epsilon(1e-3));

  const SteadyStateCurrent ref = equivalent_steady_state(CircuitSpec{kSource, 10.0, TargetElement{CapacitanceTarget{1e-9}}}, kOmega);
  CHECK(compare_emulation(tr, ref, 5e-6).rel_rms_error <= 1e-6);
}

TEST_CASE("free decay and growth") {
  const double RC = 10.0 * 1e-9;
  SimulationOptions o;
  o.initial = InitialCharge::explicit_value;
  o.q0 = 1e-9;
  const SimulationTrace d = simulate_tvc(CircuitSpec{kQuiet, 10.0, TvcBranch{flat(1e-9, 6 * RC, RC / 200), std::nullopt}}, 5 * RC, o);
  CHECK(d.q[d.q.size() - 1] == doctest::Approx(std::exp(-5.0) * 1e-9).epsilon(0.01));

  // ideal negative capacitor
  o.require_positive_profile = false;
  o.q0 = 1e-12;
  const SimulationTrace g =
      simulate_tvc(CircuitSpec{kQuiet, 10.0, TvcBranch{flat(-1e-9, 30 * RC, RC / 200), std::nullopt}}, 30 * RC, o);
  CHECK(g.diverged);
  REQUIRE(g.divergence_time);
  CHECK(*g.divergence_time == doctest::Approx(RC * std::log(1e6)).epsilon(0.02));
  const double rate = std::log(g.q.at(3 * RC) / g.q.at(0.0)) / (3 * RC);
  CHECK(rate == doctest::Approx(1.0 / RC).epsilon(0.02));
  for (double q : g.q.samples()) CHECK(std::isfinite(q));
}

TEST_CASE("equivalent steady state") {
  const SteadyStateCurrent c = equivalent_steady_state(CircuitSpec{kSource, 10.0, TargetElement{CapacitanceTarget{-1e-9}}}, kOmega);
  CHECK(c.ac.amplitude == doctest::Approx(6.27e-3).epsilon(1e-3));
  CHECK(c.dc == 0.0);
  CHECK(c.ac.phase * 180.0 / pi == doctest::Approx(-86.4).epsilon(1e-3));

  const SteadyStateCurrent r = equivalent_steady_state(CircuitSpec{kSource, 10.0, TargetElement{ResistanceTarget{10.0}}}, kOmega);
  CHECK(r.dc == doctest::Approx(0.3));
  CHECK(r.ac.amplitude == doctest::Approx(0.05));

  const SteadyStateCurrent l =
      equivalent_steady_state(CircuitSpec{kSource, 10.0, TargetElement{LossyInductanceTarget{-1e-6, 1.0, 1.0}}}, kOmega);
  CHECK(l.dc == doctest::Approx(6.0 / 11.0));
  CHECK(l.ac.amplitude == doctest::Approx(79.0e-3).epsilon(1e-3));

  CHECK(code_of([] {
          equivalent_steady_state(CircuitSpec{kSource, 10.0, TargetElement{GeneralTarget{AdmittanceKernel{}}}}, kOmega);
        }) == Errc::unsupported_target);
}

TEST_CASE("compare emulation") {
  const SteadyStateCurrent ref = equivalent_steady_state(CircuitSpec{kSource, 10.0, TargetElement{CapacitanceTarget{-1e-9}}}, kOmega);
  const Waveform grid = flat(1.0, 10e-6);
  SimulationTrace self{grid.with_unit("C"), grid.with_unit("V"), ref.sample_on(grid), false, std::nullopt};
  const EmulationReport same = compare_emulation(self, ref, 5e-6);
  CHECK(same.rel_rms_error == 0.0);
  CHECK(same.periods == 5);
  CHECK(same.per_period_error.size() == 5);
  CHECK(code_of([&] { compare_emulation(self, ref, 8e-6); }) == Errc::window_too_short);

  // exact-equivalence profile, started on its own trajectory
  const CircuitSpec target{kSource, 10.0, TargetElement{CapacitanceTarget{-1e-9}}};
  const Waveform v = sample(expected_element_voltage(target, ref), 0.0, kDt, 15 * 2000 + 1);
  const ModulationProfile p = synth_capacitance(v, -1e-9);
  SimulationOptions o;
  o.initial = InitialCharge::explicit_value;
  o.q0 = p.capacitance[0] * v[0];
  const CircuitSpec emu{kSource, 10.0, TvcBranch{p.capacitance, std::nullopt}};
  const SimulationTrace tr = simulate_tvc(emu, 15e-6, o);
  CHECK(compare_emulation(tr, ref, 5e-6).rel_rms_error <= 5e-3);

  // modulation switched off: the mean capacitance is an ordinary capacitor
  const CircuitSpec frozen{kSource, 10.0, TvcBranch{flat(p.capacitance.mean(), 15e-6), std::nullopt}};
  CHECK(compare_emulation(simulate_tvc(frozen, 15e-6), ref, 5e-6).rel_rms_error > 0.5);
}

TEST_CASE("rk4 converges at fourth order") {
  const double RC = 1e-8;
  auto err = [&](double dt) {
    SimulationOptions o;
    o.initial = InitialCharge::explicit_value;
    o.q0 = 1e-9;
    const SimulationTrace d = simulate_tvc(CircuitSpec{kQuiet, 10.0, TvcBranch{flat(1e-9, 3 * RC, dt), std::nullopt}}, 3 * RC, o);
    double e = 0.0;
    for (std::size_t n = 0; n < d.q.size(); ++n) e = std::max(e, std::abs(d.q[n] - 1e-9 * std::exp(-d.q.time(n) / RC)));
    return e;
  };
  const double e1 = err(RC / 10);
  const double e2 = err(RC / 20);
  CHECK(e1 / e2 >= 8.0);
  CHECK(std::log2(e1 / e2) >= 3.9);
}

TEST_CASE("branch current is the charge derivative plus the loss current") {
  const double R_C = 25.0;
  auto mismatch = [&](std::size_t spp) {
    const Waveform v = sample(kSource, 0.0, 1e-6 / static_cast<double>(spp), 4 * spp + 1);
    const ModulationProfile p = synth_capacitance(v, -1e-9, SynthOptions{14e-9, std::nullopt, true});
    const SimulationTrace tr = simulate_tvc(CircuitSpec{kSource, 10.0, TvcBranch{p.capacitance, R_C}}, 4e-6);
    const Waveform dq = derivative(tr.q);
    double worst = 0.0, peak = 0.0;
    for (std::size_t n = 1; n + 1 < dq.size(); ++n) {
      worst = std::max(worst, std::abs(tr.i[n] - (dq[n] + tr.v_cap[n] / R_C)));
      peak = std::max(peak, std::abs(tr.i[n]));
    }
    return worst / peak;
  };
  const double e1 = mismatch(2000);
  const double e2 = mismatch(4000);
  CHECK(e1 <= 1e-3);
  CHECK(e1 / e2 >= 3.5);

  // DC start with the divider: a constant capacitor and a pure DC source stay put
  const SimulationTrace dc =
      simulate_tvc(CircuitSpec{HarmonicSignal{6.0, 0.0, kOmega, 0.0}, 10.0, TvcBranch{flat(1e-9, 1e-6), 10.0}}, 1e-6);
  for (double x : dc.v_cap.samples()) CHECK(x == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("simulation preconditions") {
  CHECK(code_of([] { simulate_tvc(CircuitSpec{kSource, 10.0, TvcBranch{flat(-1e-9, 1e-6), std::nullopt}}, 1e-6); }) ==
        Errc::profile_not_positive);
  CHECK(code_of([] { simulate_tvc(CircuitSpec{kSource, 10.0, TvcBranch{flat(1e-9, 1e-6), std::nullopt}}, 2e-6); }) ==
        Errc::invalid_argument);
  CHECK(code_of([] { simulate_tvc(CircuitSpec{kSource, 0.0, TvcBranch{flat(1e-9, 1e-6), std::nullopt}}, 1e-6); }) ==
        Errc::nonpositive_resistance);
  CHECK(code_of([] { simulate_tvc(CircuitSpec{kSource, 10.0, TvcBranch{flat(1e-9, 1e-6), 0.0}}, 1e-6); }) ==
        Errc::zero_resistance);
}
