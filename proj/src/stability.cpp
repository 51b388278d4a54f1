#include "tvcap/stability.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "tvcap/csv.hpp"
#include "tvcap/error.hpp"

namespace tvcap {

std::string_view to_string(Verdict v) { return v == Verdict::stable ? "stable" : "not-proven-stable"; }

ModulationBounds modulation_bounds(const Waveform& capacitance, double R_effective) {
  require(std::isfinite(R_effective) && R_effective > 0.0, Errc::nonpositive_resistance,
          "effective resistance must be positive");
  bool positive = false;
  bool negative = false;
  bool zero = false;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (double c : capacitance.samples()) {
    positive |= c > 0.0;
    negative |= c < 0.0;
    zero |= c == 0.0;
    const double coef = 1.0 / (R_effective * c);
    lo = std::min(lo, coef);
    hi = std::max(hi, coef);
  }
  if (zero || (positive && negative)) {
    const double inf = std::numeric_limits<double>::infinity();
    return {-inf, inf, false};
  }
  return {lo, hi, true};
}

double parallel_resistance(double R_s, std::optional<double> R_C) {
  require(std::isfinite(R_s) && R_s > 0.0, Errc::nonpositive_resistance, "R_s must be positive");
  if (!R_C || std::isinf(*R_C)) return R_s;
  require(*R_C != 0.0, Errc::zero_resistance, "R_C must be nonzero");
  return R_s / (R_s / *R_C + 1.0);
}

StabilityReport circle_criterion(double a, double b) {
  require(!std::isnan(a) && !std::isnan(b), Errc::invalid_argument, "bounds must not be NaN");
  require(a <= b, Errc::unordered_bounds, "lower bound exceeds upper bound");
  StabilityReport r;
  r.a = a;
  r.b = b;
  r.circle_radius = 0.5 * (1.0 / a - 1.0 / b);
  r.circle_center = -1.0 / b - r.circle_radius;
  const double right_edge = r.circle_center + r.circle_radius;
  std::ostringstream why;
  if (a > 0.0 && b > 0.0 && right_edge < 0.0) {
    r.verdict = Verdict::stable;
    why << "critical circle lies in the open left half-plane (rightmost point " << right_edge
        << " s) and cannot meet the locus of 1/s; the criterion is sufficient only";
  } else {
    r.verdict = Verdict::not_proven_stable;
    if (std::isinf(a) || std::isinf(b)) {
      why << "C(t) reaches zero or changes sign, so 1/(R C(t)) is unbounded";
    } else {
      why << "bounds of 1/(R C(t)) are not both positive (a=" << a << ", b=" << b
          << "); the circle reaches the right half-plane";
    }
  }
  r.reason = why.str();
  return r;
}

double TransientLaw::e_folding_time() const { return 1.0 / std::abs(rate); }

TransientLaw ideal_nonfoster_transient(double R, double C0, double amplitude) {
  require(std::isfinite(R) && R > 0.0, Errc::nonpositive_resistance, "R must be positive");
  require(std::isfinite(C0) && C0 != 0.0, Errc::zero_capacitance, "C0 must be nonzero");
  return TransientLaw{amplitude, -1.0 / (R * C0)};
}

void write_report(std::ostream& out, const StabilityReport& report) {
  out << "stability.a_per_s = " << csv::format_double(report.a) << '\n'
      << "stability.b_per_s = " << csv::format_double(report.b) << '\n'
      << "stability.circle_center_s = " << csv::format_double(report.circle_center) << '\n'
      << "stability.circle_radius_s = " << csv::format_double(report.circle_radius) << '\n'
      << "stability.verdict = " << to_string(report.verdict) << '\n'
      << "stability.reason = " << report.reason << '\n';
}

}  // namespace tvcap
