#pragma once

#include <numbers>

namespace tvcap::constants {

inline constexpr double pi = std::numbers::pi;
inline constexpr double speed_of_light = 299792458.0;           // m/s
inline constexpr double vacuum_impedance = 376.730313668;       // Ohm (CODATA 2018)
inline constexpr double vacuum_permittivity = 1.0 / (vacuum_impedance * speed_of_light);
inline constexpr double vacuum_permeability = vacuum_impedance / speed_of_light;

}  // namespace tvcap::constants
