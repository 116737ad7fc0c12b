#pragma once

#include <numbers>

namespace casimir {

// CODATA 2018 exact/recommended values, SI units.
struct PhysicalConstants {
  static constexpr double hbar = 1.054571817e-34;         // J s
  static constexpr double c = 299792458.0;                // m / s
  static constexpr double eps0 = 8.8541878128e-12;        // F / m
  static constexpr double G = 6.67430e-11;                // m^3 / (kg s^2)
  static constexpr double electron_volt = 1.602176634e-19;  // J
  static constexpr double hbar_ev = hbar / electron_volt;   // eV s
};

inline constexpr double pi = std::numbers::pi;

/// Angular frequency (rad/s) of a photon of the given energy in eV.
constexpr double ev_to_rad_per_s(double energy_ev) {
  return energy_ev / PhysicalConstants::hbar_ev;
}

constexpr double rad_per_s_to_ev(double omega) {
  return omega * PhysicalConstants::hbar_ev;
}

}  // namespace casimir
