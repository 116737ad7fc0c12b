#pragma once

// Brute-force Yukawa force between a layered sphere and a layered plate.
//
// The plate's vertical field at height h is integrated numerically over
// lateral distance and depth from the pair force
//   G alpha rho dV (1 + r/lambda) e^{-r/lambda} / r^2,
// then summed over horizontal slices of the sphere whose shell areas are
// computed from the geometry. Nothing here uses the closed-form factors of
// the library implementation.

#include "casimir/constants.hpp"
#include "casimir/quadrature.hpp"
#include "casimir/yukawa.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace oracle {

using casimir::yukawa::LayeredBody;

// Vertical field per unit G alpha from a plane of unit areal density at
// vertical distance a: 2 pi a int_a^inf (1 + r/lambda) e^{-r/lambda} / r^2 dr
// (lateral integral with s ds = r dr).
inline double sheet_field(double a, double lambda, double tol) {
  casimir::quad::MarchOptions opt;
  opt.first_width = lambda;
  opt.min_panels = 4;
  auto f = [&](double r) { return (1.0 + r / lambda) * std::exp(-r / lambda) / (r * r); };
  return 2.0 * casimir::pi * a * casimir::quad::integrate_to_infinity(f, a, tol, opt).value;
}

inline double plate_field(double h, double lambda, const LayeredBody& plate, double tol) {
  double depth = 0.0, sum = 0.0;
  auto integrand = [&](double d) { return sheet_field(h + d, lambda, tol); };
  for (const auto& l : plate.layers) {
    sum += l.density * casimir::quad::integrate(integrand, depth, depth + l.thickness, tol).value;
    depth += l.thickness;
  }
  if (plate.core_density > 0.0) {
    casimir::quad::MarchOptions opt;
    opt.first_width = lambda;
    sum += plate.core_density *
           casimir::quad::integrate_to_infinity(integrand, depth, tol, opt).value;
  }
  return sum;
}

// Mass per unit height of the sphere's slice at offset x from its centre.
inline double slice_mass(double x, const LayeredBody& sphere) {
  const double radius = std::get<casimir::yukawa::Sphere>(sphere.shape).radius;
  auto disk = [x](double r) { return r > std::abs(x) ? casimir::pi * (r * r - x * x) : 0.0; };
  double r_out = radius, m = 0.0;
  for (const auto& l : sphere.layers) {
    const double r_in = r_out - l.thickness;
    m += l.density * (disk(r_out) - disk(r_in));
    r_out = r_in;
  }
  return m + sphere.core_density * disk(r_out);
}

inline double force(double alpha, double lambda, const LayeredBody& sphere,
                    const LayeredBody& plate, double z, double tol = 1e-5) {
  const double radius = std::get<casimir::yukawa::Sphere>(sphere.shape).radius;
  // Slices further than 60 lambda above the bottom contribute below e^-60.
  const double top = std::min(radius, -radius + 60.0 * lambda);
  std::vector<double> breaks{-radius};
  double r = radius;
  for (const auto& l : sphere.layers) {
    r -= l.thickness;
    if (-r < top) breaks.push_back(-r);
  }
  breaks.push_back(top);
  std::sort(breaks.begin(), breaks.end());
  auto integrand = [&](double x) {
    return slice_mass(x, sphere) * plate_field(z + radius + x, lambda, plate, tol);
  };
  return casimir::PhysicalConstants::G * alpha *
         casimir::quad::integrate_panels(integrand, breaks, tol).value;
}

}  // namespace oracle
