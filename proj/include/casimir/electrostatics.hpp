#pragma once

// Sphere-plane electrostatics used to calibrate the force transducer.
//
// Force sign bookkeeping: everything here is a magnitude. The electrostatic
// attraction is reported as a non-negative number; the oscillator module
// owns signed totals.

#include "casimir/lifshitz.hpp"

#include <array>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <span>
#include <string>
#include <vector>

namespace casimir::electrostatics {

struct ElectrostaticConfig {
  double v_applied;   // V_Au, volts
  double v_residual;  // V0, volts
  lifshitz::SpherePlaneGeometry geometry;
  double series_tol = 1e-13;  // in (0, 1e-6]

  void validate() const;
};

/// Dimensionless sum S(x) = -sum_n [coth u - n coth nu] / sinh nu with
/// cosh u = 1 + x, x = gap / R. Positive. Throws ConvergenceError after
/// 1e5 terms.
double series_sum(double gap_over_radius, double series_tol = 1e-13);

/// 2 pi eps0 (V_Au - V0)^2 S((z_metal + 2 delta0) / R), in newtons (>= 0).
double electrostatic_force(const ElectrostaticConfig& cfg);

/// Convenience overload for fitting loops.
double electrostatic_force(double z_metal, double voltage_difference,
                           double radius, double delta0,
                           double series_tol = 1e-13);

/// Small-gap expansion of S(x) through `order` terms:
///   order 1: 1/(2x)
///   order 2: + ln(x)/6 + 1/18 - ln(2)/6 - gamma_E/3
///   order 3: + x (-ln(x)/45 - 7/150 + ln(2)/45 + 2 gamma_E/45)
double small_gap_expansion(double gap_over_radius, int order);

inline constexpr int kMaxExpansionOrder = 3;

struct TruncationRow {
  std::size_t n;
  double partial_sum;  // dimensionless S after n terms
};

struct ExpansionCheck {
  int order;
  double value;
  double rel_error;  // against the converged series
};

struct TruncationReport {
  double gap_over_radius;
  double series_value;
  std::vector<TruncationRow> partial_sums;
  std::vector<ExpansionCheck> expansion;
  double threshold;
  /// Smallest expansion order within threshold, or 0 if none up to
  /// kMaxExpansionOrder is.
  int orders_needed;
};

TruncationReport series_truncation_report(const ElectrostaticConfig& cfg,
                                          double threshold = 1e-3);

struct CalibrationSample {
  double z_metal;   // m
  double v_applied; // V
  double delta_c;   // F, measured capacitance difference
};

struct CalibrationParams {
  double k;       // N/F
  double v0;      // V
  double radius;  // m
  double delta0;  // m
};

struct CalibrationFit {
  double k;
  double v0;
  double radius;
  double delta0;
  // Order (k, v0, radius, delta0).
  std::array<std::array<double, 4>, 4> covariance;
  double residual_rms;  // N
  std::size_t iterations;

  std::array<double, 4> sigma() const;
};

struct FitOptions {
  double jacobian_step = 1e-6;  // relative central-difference step
  double xtol = 1e-15;
  double ftol = 1e-15;
  std::size_t max_evaluations = 4000;
};

/// Least squares over (k, V0, R, delta0) of k * dC - F_e(z, V; V0, R, delta0).
/// Throws IdentifiabilityError with fewer than two voltages, fewer than
/// four distinct (z, V) pairs, or a rank-deficient Jacobian at the optimum;
/// FitError when the minimizer fails.
CalibrationFit calibrate(std::span<const CalibrationSample> samples,
                         const CalibrationParams& initial_guess,
                         const FitOptions& options = {});

/// Starting point from physical priors: V0 from the vertex of dC(V) at each
/// separation with three or more voltages, the nominal radius, delta0 = 0,
/// and k from the median of F_e / dC.
CalibrationParams initial_guess(std::span<const CalibrationSample> samples,
                                double nominal_radius);

/// Noise-free samples k * dC = F_e for every (z, V) pair of the grids.
std::vector<CalibrationSample> synthesize_samples(
    const CalibrationParams& truth, std::span<const double> z_grid,
    std::span<const double> voltages);

/// CSV with header `z_metal_m,v_applied_v,delta_c_f`.
std::vector<CalibrationSample> parse_calibration_csv(std::istream& in,
                                                     const std::string& source);
std::vector<CalibrationSample> load_calibration_csv(const std::filesystem::path& path);

}  // namespace casimir::electrostatics
