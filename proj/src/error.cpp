#include "tvcap/error.hpp"

namespace tvcap {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::invalid_grid: return "invalid-grid";
    case Errc::too_short: return "too-short";
    case Errc::unit_mismatch: return "unit-mismatch";
    case Errc::grid_mismatch: return "grid-mismatch";
    case Errc::cutoff_above_nyquist: return "cutoff-above-nyquist";
    case Errc::window_too_short: return "window-too-short";
    case Errc::insufficient_history: return "insufficient-history";
    case Errc::incommensurate_grids: return "incommensurate-grids";
    case Errc::voltage_crosses_zero: return "voltage-crosses-zero";
    case Errc::unsatisfiable_positivity: return "unsatisfiable-positivity";
    case Errc::zero_resistance: return "zero-resistance";
    case Errc::mixed_sign_voltage: return "mixed-sign-voltage";
    case Errc::profile_not_positive: return "profile-not-positive";
    case Errc::unsupported_target: return "unsupported-target";
    case Errc::unordered_bounds: return "unordered-bounds";
    case Errc::zero_capacitance: return "zero-capacitance";
    case Errc::nonpositive_resistance: return "nonpositive-resistance";
    case Errc::positivity_violated: return "positivity-violated";
    case Errc::grid_too_coarse: return "grid-too-coarse";
    case Errc::courant_violation: return "courant-violation";
    case Errc::mismatched_sources: return "mismatched-sources";
    case Errc::parse_error: return "parse-error";
    case Errc::validation_error: return "validation-error";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

}  // namespace tvcap
