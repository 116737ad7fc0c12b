#include "casimir/yukawa.hpp"

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace casimir::yukawa {

namespace {

// a (1 + e^{-2a}) - (1 - e^{-2a}); the series avoids cancellation near 0.
double ball_kernel(double a) {
  if (a < 1e-3) {
    const double a2 = a * a;
    return a2 * a * (2.0 / 3.0 - a * (2.0 / 3.0 - a * (2.0 / 5.0 - a * (8.0 / 45.0))));
  }
  const double e = std::exp(-2.0 * a);
  return a * (1.0 + e) + std::expm1(-2.0 * a);
}

// Integral of e^{-(h_top - h)/lambda} over a ball of radius r whose top is
// at height h_top, in units of lambda^3.
double ball_term(double r, double lambda) { return 2.0 * pi * ball_kernel(r / lambda); }

// sum_k rho_k e^{-D_k/lambda}(1 - e^{-t_k/lambda}) + rho_core e^{-D/lambda}
double plate_factor(const LayeredBody& plate, double lambda) {
  double depth = 0.0;
  double sum = 0.0;
  for (const auto& l : plate.layers) {
    sum += l.density * std::exp(-depth / lambda) * -std::expm1(-l.thickness / lambda);
    depth += l.thickness;
  }
  return sum + plate.core_density * std::exp(-depth / lambda);
}

// Shells as differences of concentric balls; each ball weighted by how far
// its top lies below the sphere's top.
double sphere_factor(const LayeredBody& sphere, double lambda) {
  const double radius = std::get<Sphere>(sphere.shape).radius;
  double r_out = radius;
  double sum = 0.0;
  auto ball = [&](double r) {
    return r > 0.0 ? std::exp(-(radius - r) / lambda) * ball_term(r, lambda) : 0.0;
  };
  double outer = ball(r_out);
  for (const auto& l : sphere.layers) {
    const double r_in = r_out - l.thickness;
    const double inner = ball(r_in);
    sum += l.density * (outer - inner);
    r_out = r_in;
    outer = inner;
  }
  return sum + sphere.core_density * outer;
}

}  // namespace

void LayeredBody::validate() const {
  double total = 0.0;
  for (const auto& l : layers) {
    if (!(l.thickness > 0.0) || !std::isfinite(l.thickness)) {
      throw DomainError("layer thickness must be positive");
    }
    if (!(l.density > 0.0) || !std::isfinite(l.density)) {
      throw DomainError("layer density must be positive");
    }
    total += l.thickness;
  }
  if (!(core_density >= 0.0) || !std::isfinite(core_density)) {
    throw DomainError("core density must be non-negative");
  }
  if (const auto* s = std::get_if<Sphere>(&shape)) {
    if (!(s->radius > 0.0)) throw DomainError("sphere radius must be positive");
    if (!(total < s->radius)) throw DomainError("sphere layers exceed the radius");
    if (!(core_density > 0.0)) throw DomainError("sphere core density must be positive");
  }
}

LayeredBody default_sphere(double radius) {
  return {{{203e-9, density::gold}, {1e-9, density::chromium}},
          density::sapphire,
          Sphere{radius}};
}

LayeredBody default_plate() {
  return {{{200e-9, density::copper}, {1e-9, density::chromium}, {3.5e-6, density::silicon}},
          0.0,
          HalfSpace{}};
}

double yukawa_force_sphere_plane(const YukawaParams& p, const LayeredBody& sphere,
                                 const LayeredBody& plate, double z) {
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) {
    throw DomainError("Yukawa range lambda must be positive");
  }
  if (!std::isfinite(p.alpha)) throw DomainError("Yukawa strength must be finite");
  if (!(z > 0.0)) throw DomainError("separation must be positive");
  sphere.validate();
  plate.validate();
  if (!sphere.is_sphere() || plate.is_sphere()) {
    throw DomainError("expected a sphere above a half-space plate");
  }
  if (p.alpha == 0.0) return 0.0;
  const double lambda = p.lambda;
  // Point potential above the plate is -2 pi G alpha lambda^2 e^{-h/lambda} Phi;
  // integrating over the sphere and differentiating in z gives U / lambda.
  const double l3 = lambda * lambda * lambda;
  return 2.0 * pi * PhysicalConstants::G * p.alpha * lambda * l3 *
         plate_factor(plate, lambda) * std::exp(-z / lambda) *
         sphere_factor(sphere, lambda);
}

double alpha_limit(const ResidualBound& bound, double lambda, const LayeredBody& sphere,
                   const LayeredBody& plate, std::span<const double> z_grid) {
  if (z_grid.empty()) throw ConfigError("alpha limit needs a non-empty separation grid");
  if (!bound) throw ConfigError("no residual bound supplied");
  double best = std::numeric_limits<double>::infinity();
  for (double z : z_grid) {
    const double b = bound(z);
    if (!(b > 0.0) || !std::isfinite(b)) {
      std::ostringstream os;
      os << "residual bound must be positive; got " << b << " N at z = " << z << " m";
      throw DomainError(os.str());
    }
    const double unit = yukawa_force_sphere_plane({1.0, lambda}, sphere, plate, z);
    best = std::min(best, b / unit);
  }
  return best;
}

void write_limits_csv(std::ostream& out, std::span<const LimitRow> rows) {
  out << "lambda_m,alpha_limit\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17e,%.17e\n", r.lambda, r.alpha);
    out << buf;
  }
}

}  // namespace casimir::yukawa
