#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tvcap {

enum class Errc {
  invalid_argument,
  invalid_grid,
  too_short,
  unit_mismatch,
  grid_mismatch,
  cutoff_above_nyquist,
  window_too_short,
  insufficient_history,
  incommensurate_grids,
  voltage_crosses_zero,
  unsatisfiable_positivity,
  zero_resistance,
  mixed_sign_voltage,
  profile_not_positive,
  unsupported_target,
  unordered_bounds,
  zero_capacitance,
  nonpositive_resistance,
  positivity_violated,
  grid_too_coarse,
  courant_violation,
  mismatched_sources,
  parse_error,
  validation_error,
  io_error,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& message);

inline void require(bool condition, Errc code, const std::string& message) {
  if (!condition) fail(code, message);
}

}  // namespace tvcap
