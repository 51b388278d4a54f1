#include "tvcap/circuitsim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "tvcap/error.hpp"

namespace tvcap {

namespace {

const TvcBranch& tvc_branch(const CircuitSpec& spec) {
  const auto* branch = std::get_if<TvcBranch>(&spec.branch);
  require(branch != nullptr, Errc::invalid_argument, "circuit has no time-varying capacitor branch");
  return *branch;
}

std::complex<double> element_impedance(const TargetElement& target, double omega) {
  using namespace std::complex_literals;
  if (const auto* c = std::get_if<CapacitanceTarget>(&target)) {
    require(c->C_eq != 0.0, Errc::zero_capacitance, "C_eq must be nonzero for a phasor reference");
    return 1.0 / (1i * omega * c->C_eq);
  }
  if (const auto* r = std::get_if<ResistanceTarget>(&target)) return {r->R_eq, 0.0};
  if (const auto* l = std::get_if<LossyInductanceTarget>(&target)) return l->R_L + 1i * omega * l->L_eq;
  fail(Errc::unsupported_target, "steady-state reference supports capacitance, resistance and lossy inductance");
}

}  // namespace

void CircuitSpec::validate() const {
  source.validate();
  require(std::isfinite(R_s) && R_s > 0.0, Errc::nonpositive_resistance, "source resistance R_s must be positive");
  if (const auto* b = std::get_if<TvcBranch>(&branch)) {
    if (b->R_C) require(*b->R_C != 0.0, Errc::zero_resistance, "parallel R_C must be nonzero");
  } else {
    tvcap::validate(std::get<TargetElement>(branch));
  }
}

SimulationTrace simulate_tvc(const CircuitSpec& spec, double t_end, const SimulationOptions& opts) {
  spec.validate();
  const TvcBranch& branch = tvc_branch(spec);
  const Waveform& cap = branch.capacitance;
  const double dt = cap.dt();
  require(t_end > cap.t0() && t_end <= cap.end_time() + 1e-9 * dt, Errc::invalid_argument,
          "t_end must lie inside the profile span");
  const auto steps = static_cast<std::size_t>(std::llround((t_end - cap.t0()) / dt));
  require(steps >= 1, Errc::invalid_argument, "simulation span is shorter than one step");

  for (std::size_t n = 0; n <= steps; ++n) {
    if (opts.require_positive_profile) {
      require(cap[n] > 0.0, Errc::profile_not_positive,
              "C(t) <= 0 at t = " + std::to_string(cap.time(n)) + " s");
    } else {
      require(cap[n] != 0.0, Errc::zero_capacitance, "C(t) = 0 at t = " + std::to_string(cap.time(n)) + " s");
    }
  }

  const double R_s = spec.R_s;
  const double k = 1.0 + (branch.R_C ? R_s / *branch.R_C : 0.0);
  const HarmonicSignal& vs = spec.source;
  auto rhs = [&](double t, double q, double c) { return (vs(t) - k * q / c) / R_s; };

  double q = 0.0;
  switch (opts.initial) {
    case InitialCharge::dc_steady_state: {
      const double divider = branch.R_C ? *branch.R_C / (R_s + *branch.R_C) : 1.0;
      q = cap[0] * vs.dc * divider;
      break;
    }
    case InitialCharge::zero: q = 0.0; break;
    case InitialCharge::explicit_value: q = opts.q0; break;
  }

  double c_peak = 0.0;
  for (std::size_t n = 0; n <= steps; ++n) c_peak = std::max(c_peak, std::abs(cap[n]));
  const double scale = std::max(std::abs(q), c_peak * (std::abs(vs.dc) + vs.amplitude));
  const double limit = scale > 0.0 ? opts.divergence_factor * scale : std::numeric_limits<double>::infinity();

  std::vector<double> qs;
  std::vector<double> vc;
  std::vector<double> is;
  qs.reserve(steps + 1);
  vc.reserve(steps + 1);
  is.reserve(steps + 1);
  bool diverged = false;
  std::optional<double> divergence_time;

  auto record = [&](std::size_t n) {
    const double t = cap.time(n);
    const double v = q / cap[n];
    qs.push_back(q);
    vc.push_back(v);
    is.push_back((vs(t) - v) / R_s);
  };

  record(0);
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = cap.time(n);
    const double c0 = cap[n];
    const double c1 = cap[n + 1];
    const double cm = 0.5 * (c0 + c1);
    const double k1 = rhs(t, q, c0);
    const double k2 = rhs(t + 0.5 * dt, q + 0.5 * dt * k1, cm);
    const double k3 = rhs(t + 0.5 * dt, q + 0.5 * dt * k2, cm);
    const double k4 = rhs(t + dt, q + dt * k3, c1);
    q += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!std::isfinite(q) || std::abs(q) > limit) {
      diverged = true;
      divergence_time = cap.time(n + 1);
      if (std::isfinite(q) && qs.size() < 2) record(n + 1);
      break;
    }
    record(n + 1);
  }
  if (qs.size() < 2) {
    // diverged on the very first step with a non-finite value
    qs.push_back(qs.back());
    vc.push_back(vc.back());
    is.push_back(is.back());
  }

  return SimulationTrace{Waveform(cap.t0(), dt, std::move(qs), "C"), Waveform(cap.t0(), dt, std::move(vc), "V"),
                         Waveform(cap.t0(), dt, std::move(is), "A"), diverged, divergence_time};
}

Waveform SteadyStateCurrent::sample_on(const Waveform& grid, const std::string& unit) const {
  std::vector<double> values(grid.size());
  for (std::size_t n = 0; n < values.size(); ++n) values[n] = (*this)(grid.time(n));
  return Waveform(grid.t0(), grid.dt(), std::move(values), unit);
}

SteadyStateCurrent equivalent_steady_state(const CircuitSpec& spec, double omega) {
  spec.validate();
  const auto* target = std::get_if<TargetElement>(&spec.branch);
  require(target != nullptr, Errc::unsupported_target, "steady-state reference needs an equivalent element branch");
  require(std::isfinite(omega) && omega > 0.0, Errc::invalid_argument, "omega must be positive");
  const std::complex<double> z = element_impedance(*target, omega);
  const std::complex<double> v_ac = std::polar(spec.source.amplitude, spec.source.phase);

  SteadyStateCurrent out;
  out.ac = Phasor::from_complex(v_ac / (spec.R_s + z), omega);
  if (const auto* r = std::get_if<ResistanceTarget>(target)) {
    out.dc = spec.source.dc / (spec.R_s + r->R_eq);
  } else if (const auto* l = std::get_if<LossyInductanceTarget>(target)) {
    out.dc = spec.source.dc / (spec.R_s + l->R_L);
  } else {
    out.dc = 0.0;
  }
  return out;
}

SteadyStateCurrent kernel_steady_state(const HarmonicSignal& source, double R_s, const AdmittanceKernel& k) {
  source.validate();
  require(std::isfinite(R_s) && R_s > 0.0, Errc::nonpositive_resistance, "source resistance R_s must be positive");
  const std::complex<double> y = k.response(source.omega);
  const double y_dc = k.response(0.0).real();
  SteadyStateCurrent out;
  out.ac = Phasor::from_complex(source.phasor() * y / (1.0 + R_s * y), source.omega);
  out.dc = source.dc * y_dc / (1.0 + R_s * y_dc);
  return out;
}

HarmonicSignal expected_element_voltage(const CircuitSpec& spec, const SteadyStateCurrent& current) {
  const std::complex<double> v = spec.source.phasor() - spec.R_s * current.ac.complex();
  const Phasor p = Phasor::from_complex(v, current.ac.omega);
  return HarmonicSignal{spec.source.dc - spec.R_s * current.dc, p.amplitude, spec.source.omega, p.phase};
}

EmulationReport compare_emulation(const SimulationTrace& trace, const SteadyStateCurrent& reference, double settle) {
  const double omega = reference.ac.omega;
  require(omega > 0.0, Errc::invalid_argument, "reference needs a positive angular frequency");
  const Waveform& i = trace.i;
  const double period = 2.0 * std::acos(-1.0) / omega;
  const std::size_t first = i.index_at_or_after(settle);
  require(first < i.size(), Errc::window_too_short, "trace ends before the settle time");
  const double span = static_cast<double>(i.size() - 1 - first) * i.dt();
  const auto periods = static_cast<std::size_t>(std::floor(span / period + 1e-9));
  require(periods >= 3, Errc::window_too_short, "trace must cover at least three periods after settling");

  EmulationReport report;
  report.settle = settle;
  report.periods = periods;
  double err_total = 0.0;
  double ref_total = 0.0;
  for (std::size_t p = 0; p < periods; ++p) {
    const std::size_t lo = first + static_cast<std::size_t>(std::llround(static_cast<double>(p) * period / i.dt()));
    const std::size_t hi =
        std::min(i.size(), first + static_cast<std::size_t>(std::llround(static_cast<double>(p + 1) * period / i.dt())));
    double err = 0.0;
    double ref = 0.0;
    for (std::size_t n = lo; n < hi; ++n) {
      const double r = reference(i.time(n));
      err += (i[n] - r) * (i[n] - r);
      ref += r * r;
    }
    report.per_period_error.push_back(ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err));
    err_total += err;
    ref_total += ref;
  }
  report.rel_rms_error = ref_total > 0.0 ? std::sqrt(err_total / ref_total) : std::sqrt(err_total);
  return report;
}

}  // namespace tvcap
