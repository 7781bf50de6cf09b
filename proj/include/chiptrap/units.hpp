#pragma once

#include <numbers>

// Unit conventions used throughout the library:
//   positions   micrometres
//   fields      gauss
//   currents    milliamperes
//   time        seconds
//   energies    angular frequency E/hbar in rad/s
namespace chiptrap::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline constexpr double planck = 6.62607015e-34;          // J s
inline constexpr double hbar = planck / two_pi;            // J s
inline constexpr double rb87_mass = 1.44316e-25;           // kg

// mu0 / 2pi expressed in G um / mA.
inline constexpr double wire_field_constant = 2.0;

inline constexpr double um2_per_m2 = 1e12;

// hbar / 2m in um^2 rad/s.
constexpr double kinetic_coefficient(double mass_kg) {
    return hbar / (2.0 * mass_kg) * um2_per_m2;
}

constexpr double hz_to_rad(double f) { return two_pi * f; }
constexpr double rad_to_hz(double w) { return w / two_pi; }

}  // namespace chiptrap::units
