#pragma once

// Zero-temperature Lifshitz interaction between two dissimilar metals.
//
// Sign convention, used by every function here: attractive forces and
// pressures are negative; the sphere-plane force gradient dF/dz is reported
// as a positive number for an attraction that weakens with distance.
//
// All separations are the roughness-corrected surface distance
// z = z_metal + 2*delta0.

#include "casimir/materials.hpp"

#include <cstddef>

namespace casimir::lifshitz {

using materials::DielectricModel;

struct SpherePlaneGeometry {
  double radius;      // m
  double separation;  // m, raw metal-metal distance z_metal
  double delta0 = 0;  // m, per-surface mean contact offset

  /// Throws DomainError on non-positive radius/separation or negative delta0.
  void validate() const;
  double corrected_separation() const { return separation + 2.0 * delta0; }
  /// The integrals do not need z << R, but beyond this the proximity
  /// treatment of the sphere is questionable.
  bool outside_proximity_regime() const { return separation / radius > 0.1; }
};

struct LifshitzResult {
  double value = 0.0;  // N, N/m^2 or N/m depending on the call
  double est_rel_error = 0.0;
  std::size_t evaluations = 0;
};

struct QuadratureOptions {
  double tol = 1e-6;            // requested relative accuracy, [1e-8, 1e-3]
  double xi_min_ev = 1e-5;      // floor for dielectric evaluation near xi = 0
  std::size_t max_evaluations = 100'000'000;
};

/// Plane-plane pressure P(z), both polarizations, N/m^2 (negative).
/// Throws ConvergenceError carrying the partial value if the quadrature
/// misses the tolerance or budget.
LifshitzResult pressure_plane_plane(double z, const DielectricModel& m1,
                                    const DielectricModel& m2,
                                    const QuadratureOptions& opts = {});

/// Sphere-plane force in the proximity approximation, N (negative).
LifshitzResult force_sphere_plane(double z, double radius,
                                  const DielectricModel& m1,
                                  const DielectricModel& m2,
                                  const QuadratureOptions& opts = {});

/// dF/dz = 2 pi R |P(z)|, N/m (positive).
LifshitzResult force_gradient_sphere_plane(double z, double radius,
                                           const DielectricModel& m1,
                                           const DielectricModel& m2,
                                           const QuadratureOptions& opts = {});

/// -pi^3 hbar c R / (360 z^3)
double ideal_force_sphere_plane(double z, double radius);

/// -pi^2 hbar c / (240 z^4)
double ideal_pressure_plane_plane(double z);

}  // namespace casimir::lifshitz
