#include "casimir/lifshitz.hpp"

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace casimir::lifshitz {

namespace {

using PC = PhysicalConstants;

// Reflection data of one body for one polarization at fixed (xi, p).
// `loss` is 1 - r, kept separately so that 1 - r1 r2 stays accurate when
// both coefficients approach one.
struct Reflection {
  double r;
  double loss;
};

struct PolarizationPair {
  Reflection te;
  Reflection tm;
};

PolarizationPair reflect(double eps, bool perfect, double p) {
  if (perfect) return {{1.0, 0.0}, {1.0, 0.0}};
  const double s = std::sqrt(eps - 1.0 + p * p);
  const double sp = s + p;
  const double es = eps * p + s;
  // r_TE = (s - p)/(s + p) rewritten with s^2 - p^2 = eps - 1.
  return {{(eps - 1.0) / (sp * sp), 2.0 * p / sp},
          {(eps * p - s) / es, 2.0 * s / es}};
}

// 1 - r1 r2 e^{-y} and r1 r2 for one polarization.
struct ModeFactor {
  double product;
  double denom;
};

ModeFactor mode_factor(const Reflection& a, const Reflection& b, double y) {
  const double product = a.r * b.r;
  const double one_minus = a.loss + a.r * b.loss;
  return {product, one_minus - product * std::expm1(-y)};
}

enum class Quantity { kPressure, kForce };

struct Body {
  const DielectricModel* model;
  bool perfect;
};

// Shared double integral in the dimensionless variables
//   zeta = xi / xi_c with xi_c = c / (2z), y = p * zeta in [zeta, inf).
// Pressure:  -hbar c / (32 pi^2 z^4) int dzeta int y^2 sum r r e^-y / D dy
// Force:      hbar c R / (16 pi z^3) int dzeta int y   sum ln D       dy
struct DoubleIntegral {
  double value;
  double rel_error;
  std::size_t evaluations;
};

DoubleIntegral lifshitz_integral(Quantity q, double z, const Body& b1,
                                 const Body& b2, const QuadratureOptions& opts) {
  const double xi_c_ev = PC::hbar_ev * PC::c / (2.0 * z);
  // The inner result must be smooth in zeta at the outer tolerance, or the
  // outer rule keeps bisecting on quadrature noise.
  const double inner_tol = std::max(opts.tol * 1e-3, 1e-13);
  const double outer_tol = opts.tol * 0.5;

  std::size_t evaluations = 0;
  double worst_inner = 0.0;
  bool inner_ok = true;

  auto outer = [&](double zeta) -> double {
    const double xi_ev = std::max(zeta * xi_c_ev, opts.xi_min_ev);
    const double eps1 = b1.perfect ? 0.0 : (*b1.model)(xi_ev);
    const double eps2 = b2.perfect ? 0.0 : (*b2.model)(xi_ev);

    auto inner = [&](double u) -> double {
      const double y = zeta + u;
      const double p = y / zeta;
      const auto r1 = reflect(eps1, b1.perfect, p);
      const auto r2 = reflect(eps2, b2.perfect, p);
      const auto te = mode_factor(r1.te, r2.te, y);
      const auto tm = mode_factor(r1.tm, r2.tm, y);
      if (q == Quantity::kPressure) {
        const double e = std::exp(-y);
        return y * y * (te.product * e / te.denom + tm.product * e / tm.denom);
      }
      auto log_denom = [y](const ModeFactor& m) {
        const double x = m.product * std::exp(-y);
        return x < 0.5 ? std::log1p(-x) : std::log(m.denom);
      };
      return y * (log_denom(te) + log_denom(tm));
    };

    quad::MarchOptions march;
    march.first_width = 0.25;
    march.growth = 2.0;
    march.cutoff = 1e-16;
    march.min_panels = 4;
    march.max_panels = 64;
    const auto est = quad::integrate_to_infinity(inner, 0.0, inner_tol, march);
    evaluations += est.evaluations;
    if (!est.converged) inner_ok = false;
    if (est.value != 0.0) worst_inner = std::max(worst_inner, est.rel_error());
    return est.value;
  };

  quad::MarchOptions march;
  march.first_width = 1e-7;
  march.growth = 2.0;
  march.cutoff = 1e-12;
  march.min_panels = 8;
  march.max_panels = 200;
  const auto est = quad::integrate_to_infinity(outer, 0.0, outer_tol, march);

  DoubleIntegral out{est.value, est.rel_error() + worst_inner, evaluations};
  if (!est.converged || !inner_ok) out.rel_error = std::max(out.rel_error, 1.0);
  return out;
}

void check_common(double z, const QuadratureOptions& opts) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("separation must be positive");
  if (!(opts.tol >= 1e-8 && opts.tol <= 1e-3)) {
    throw DomainError("tolerance must lie in [1e-8, 1e-3]");
  }
  if (!(opts.xi_min_ev > 0.0)) throw DomainError("xi_min must be positive");
}

LifshitzResult finish(const char* what, double value, const DoubleIntegral& di,
                      const QuadratureOptions& opts) {
  LifshitzResult res{value, di.rel_error, di.evaluations};
  if (di.rel_error > opts.tol || di.evaluations > opts.max_evaluations) {
    std::ostringstream os;
    os << what << ": quadrature did not reach tol " << opts.tol
       << " (estimated " << di.rel_error << " after " << di.evaluations
       << " evaluations)";
    throw ConvergenceError(os.str(), value, di.rel_error);
  }
  return res;
}

}  // namespace

void SpherePlaneGeometry::validate() const {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  if (!(separation > 0.0)) throw DomainError("separation must be positive");
  if (!(delta0 >= 0.0)) throw DomainError("delta0 must be non-negative");
}

LifshitzResult pressure_plane_plane(double z, const DielectricModel& m1,
                                    const DielectricModel& m2,
                                    const QuadratureOptions& opts) {
  check_common(z, opts);
  const Body b1{&m1, m1.is_perfect_conductor()};
  const Body b2{&m2, m2.is_perfect_conductor()};
  const auto di = lifshitz_integral(Quantity::kPressure, z, b1, b2, opts);
  const double z2 = z * z;
  const double prefactor = -PC::hbar * PC::c / (32.0 * pi * pi * z2 * z2);
  return finish("pressure_plane_plane", prefactor * di.value, di, opts);
}

LifshitzResult force_sphere_plane(double z, double radius,
                                  const DielectricModel& m1,
                                  const DielectricModel& m2,
                                  const QuadratureOptions& opts) {
  check_common(z, opts);
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  const Body b1{&m1, m1.is_perfect_conductor()};
  const Body b2{&m2, m2.is_perfect_conductor()};
  const auto di = lifshitz_integral(Quantity::kForce, z, b1, b2, opts);
  const double prefactor = PC::hbar * PC::c * radius / (16.0 * pi * z * z * z);
  return finish("force_sphere_plane", prefactor * di.value, di, opts);
}

LifshitzResult force_gradient_sphere_plane(double z, double radius,
                                           const DielectricModel& m1,
                                           const DielectricModel& m2,
                                           const QuadratureOptions& opts) {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  auto res = pressure_plane_plane(z, m1, m2, opts);
  res.value = 2.0 * pi * radius * std::abs(res.value);
  return res;
}

double ideal_force_sphere_plane(double z, double radius) {
  if (!(z > 0.0) || !(radius > 0.0)) {
    throw DomainError("ideal force needs positive separation and radius");
  }
  return -pi * pi * pi * PC::hbar * PC::c * radius / (360.0 * z * z * z);
}

double ideal_pressure_plane_plane(double z) {
  if (!(z > 0.0)) throw DomainError("ideal pressure needs positive separation");
  const double z2 = z * z;
  return -pi * pi * PC::hbar * PC::c / (240.0 * z2 * z2);
}

}  // namespace casimir::lifshitz
