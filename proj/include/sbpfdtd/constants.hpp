#pragma once

#include <numbers>

namespace sbpfdtd::constants {

inline constexpr double pi = std::numbers::pi;
/// Vacuum permittivity (F/m).
inline constexpr double eps0 = 8.8541878128e-12;
/// Vacuum permeability (H/m).
inline constexpr double mu0 = 4.0e-7 * pi;
/// Speed of light in vacuum (m/s).
inline constexpr double c0 = 299792458.0;

} // namespace sbpfdtd::constants
