#pragma once

// Yukawa correction to Newtonian gravity, V(r) = -G m1 m2 alpha e^{-r/lambda} / r,
// between a layered sphere and a layered plate, and the alpha(lambda)
// exclusion limits that follow from a bound on force residuals.

#include <functional>
#include <ostream>
#include <span>
#include <variant>
#include <vector>

namespace casimir::yukawa {

struct YukawaParams {
  double alpha;
  double lambda;  // m
};

struct Layer {
  double thickness;  // m
  double density;    // kg/m^3
};

struct Sphere {
  double radius;  // m
};
struct HalfSpace {};

/// Layers are listed outermost first. The core fills the rest of the sphere,
/// or the region below the last layer of a plate. A plate core density of
/// zero models a free-standing film.
struct LayeredBody {
  std::vector<Layer> layers;
  double core_density;
  std::variant<Sphere, HalfSpace> shape;

  void validate() const;
  bool is_sphere() const { return std::holds_alternative<Sphere>(shape); }
};

// Reference densities, kg/m^3.
namespace density {
inline constexpr double gold = 19300.0;
inline constexpr double copper = 8960.0;
inline constexpr double chromium = 7190.0;
inline constexpr double sapphire = 3980.0;  // Al2O3
inline constexpr double silicon = 2330.0;
}  // namespace density

/// Al2O3 sphere with 1 nm Cr and 203 nm Au.
LayeredBody default_sphere(double radius = 294.3e-6);

/// 200 nm Cu and 1 nm Cr on a 3.5 um polysilicon plate with nothing below.
LayeredBody default_plate();

/// Attractive force magnitude (N) between a layered sphere at gap z above
/// a laterally infinite layered plate. Exact for the volume integral of the
/// pair potential at any lambda; linear in alpha (negative alpha gives a
/// negative value, i.e. repulsion).
double yukawa_force_sphere_plane(const YukawaParams& p, const LayeredBody& sphere,
                                 const LayeredBody& plate, double z);

using ResidualBound = std::function<double(double z)>;

/// min over the grid of bound(z) / F(alpha = 1, z). ConfigError for an
/// empty grid, DomainError if the bound is not positive at a grid point.
double alpha_limit(const ResidualBound& bound, double lambda, const LayeredBody& sphere,
                   const LayeredBody& plate, std::span<const double> z_grid);

struct LimitRow {
  double lambda;
  double alpha;
};

/// `lambda_m,alpha_limit`
void write_limits_csv(std::ostream& out, std::span<const LimitRow> rows);

}  // namespace casimir::yukawa
