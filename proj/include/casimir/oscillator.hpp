#pragma once

// Microtorsional oscillator: suspension stiffness, separation bookkeeping,
// the linear frequency-shift response to a force gradient, and synthetic
// noisy sweeps.
//
// Signs: the force gradient passed to the frequency maps is dF/dz with the
// convention of lifshitz::force_gradient_sphere_plane, i.e. positive for a
// Casimir attraction, which lowers the resonance.

#include "casimir/lifshitz.hpp"
#include "casimir/roughness.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

namespace casimir::oscillator {

struct SerpentineSpring {
  double width;      // m
  double thickness;  // m
  double length;     // m
  double youngs;     // Pa

  void validate() const;
};

/// w t^3 E / (6 L), N m/rad.
double spring_constant(const SerpentineSpring& s);

struct OscillatorParams {
  double omega0;    // rad/s
  double coupling;  // b^2 / (2 I), 1/kg
  std::optional<double> kappa;    // N m/rad
  std::optional<double> inertia;  // kg m^2
  std::optional<double> lever;    // b, m
  std::optional<double> quality;  // Q

  /// Positivity, plus 2% agreement of omega0 with sqrt(kappa/I) and of the
  /// coupling with b^2/(2I) whenever the optional fields allow the check.
  void validate() const;

  /// Fractional frequency shift per unit gradient, b^2 / (2 I omega0^2), m/N.
  double shift_per_gradient() const { return coupling / (omega0 * omega0); }

  /// Calibrated values of the reference device. The lever arm is derived
  /// from the coupling and inertia; Q is left unset.
  static OscillatorParams reference();
};

struct SeparationModel {
  double z_fiber;    // z_i, m
  double z_contact;  // z_o, m
  double z_gap;      // z_g, m
  double lever;      // b, m
  double theta;      // rad
};

inline constexpr double kMaxTheta = 0.01;

/// z_i - z_o - z_g - b theta. DomainError when |theta| > 0.01 rad.
double separation(const SeparationModel& sm);

/// omega0 [1 - coupling/omega0^2 * grad]. DomainError once the fractional
/// shift reaches 0.1; higher-order terms in theta (about 0.1% of the shift
/// in the reference device) are not modeled.
double resonant_frequency(const OscillatorParams& p, double gradient);

/// Exact inverse of resonant_frequency.
double gradient_from_frequency(const OscillatorParams& p, double omega_r);

/// Gradient from a measured shift omega_r - omega0; avoids the
/// cancellation of subtracting two nearly equal frequencies.
double gradient_from_shift(const OscillatorParams& p, double delta_omega);

/// Gradient whose shift equals delta_f_min (Hz) in magnitude.
double min_detectable_gradient(const OscillatorParams& p, double delta_f_min_hz);

using AmplitudeSchedule = std::function<double(double z_metal)>;

/// A(z) linear from 3 nm at 0.2 um to 35 nm at 1.2 um, constant outside.
double default_amplitude(double z_metal);

struct SweepNoise {
  // Frequency noise density, Hz sqrt(s): sigma_f = freq_noise / sqrt(T).
  // The default gives 10 mHz at 10 s of integration.
  double freq_noise = 0.01 * 3.1622776601683795;
  double separation_noise = 0.32e-9;  // m rms
};

struct SweepConfig {
  std::vector<double> z_grid;  // z_metal, m
  AmplitudeSchedule amplitude = default_amplitude;
  double integration_time = 10.0;  // s
  SweepNoise noise{};

  /// ConfigError listing every grid point with A(z) >= z/5.
  void validate() const;
};

struct SweepPoint {
  double z_metal;      // nominal, m
  double z_actual;     // after separation jitter, m
  double gradient;     // true roughness-averaged dF/dz at z_actual, N/m
  double delta_omega;  // measured omega_r - omega0, rad/s (noise included)
  double omega_r;      // rad/s
  double sigma_omega;  // rad/s
};

struct SweepModel {
  OscillatorParams params;
  lifshitz::SpherePlaneGeometry geometry;  // radius and delta0; separation unused
  materials::DielectricModel sphere;
  materials::DielectricModel plate;
  roughness::RoughnessDistribution roughness = roughness::RoughnessDistribution::flat();
  lifshitz::QuadratureOptions quadrature{};
};

/// Point i uses its own random stream derived from (seed, i), so the result
/// does not depend on evaluation order or thread count. threads = 0 picks
/// the hardware concurrency.
std::vector<SweepPoint> simulate_sweep(const SweepConfig& cfg, const SweepModel& model,
                                       std::uint64_t seed, unsigned threads = 1);

/// dF/dz recovered from each point's shift.
std::vector<double> invert_sweep(const OscillatorParams& p,
                                 const std::vector<SweepPoint>& points);

/// `z_m,f_hz,sigma_hz`
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

}  // namespace casimir::oscillator
