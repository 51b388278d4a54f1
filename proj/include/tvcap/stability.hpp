#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "tvcap/signals.hpp"

namespace tvcap {

enum class Verdict { stable, not_proven_stable };

std::string_view to_string(Verdict v);

// Circle-criterion result for dq/dt + q / (R C(t)) = v_s / R.
struct StabilityReport {
  double a = 0.0;              // lower bound of 1/(R C(t)), 1/s
  double b = 0.0;              // upper bound, 1/s
  double circle_center = 0.0;  // s
  double circle_radius = 0.0;  // s
  Verdict verdict = Verdict::not_proven_stable;
  std::string reason;
};

struct ModulationBounds {
  double a = 0.0;
  double b = 0.0;
  // false when C(t) touches zero or changes sign: the coefficient is unbounded
  // and the bounds are reported as (-inf, +inf).
  bool bounded = true;
};

// Exact min/max of 1/(R_effective C(t)) over the profile grid. A profile that
// stays strictly negative gives negative bounds.
ModulationBounds modulation_bounds(const Waveform& capacitance, double R_effective);

// Effective resistance of the loss-loaded topology: the charge equation
// coefficient (R_s/R_C + 1)/(R_s C) equals 1/((R_s || R_C) C).
double parallel_resistance(double R_s, std::optional<double> R_C);

// Critical circle: radius (1/a - 1/b)/2, center -1/b - radius. The locus of
// G(s) = 1/s fills the closed right half-plane, so the test reduces to the
// circle lying strictly in the open left half-plane.
StabilityReport circle_criterion(double a, double b);

struct TransientLaw {
  double amplitude = 1.0;  // a1
  double rate = 0.0;       // 1/s; v_h(t) = a1 exp(rate t)

  bool growing() const { return rate > 0.0; }
  double e_folding_time() const;
};

// Homogeneous solution of the series R, C0 loop: v_h = a1 exp(-t/(R C0)).
TransientLaw ideal_nonfoster_transient(double R, double C0, double amplitude = 1.0);

void write_report(std::ostream& out, const StabilityReport& report);

}  // namespace tvcap
