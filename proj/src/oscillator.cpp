#include "casimir/oscillator.hpp"

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/parallel.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

namespace casimir::oscillator {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw DomainError(std::string(name) + " must be positive and finite");
  }
}

bool within(double a, double b, double rel) { return std::abs(a - b) <= rel * std::abs(b); }

constexpr double kConsistency = 0.02;
constexpr double kMaxFractionalShift = 0.1;

// splitmix64 finalizer, used to decorrelate per-point seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void SerpentineSpring::validate() const {
  require_positive(width, "spring width");
  require_positive(thickness, "spring thickness");
  require_positive(length, "spring length");
  require_positive(youngs, "Young's modulus");
}

double spring_constant(const SerpentineSpring& s) {
  s.validate();
  return s.width * s.thickness * s.thickness * s.thickness * s.youngs / (6.0 * s.length);
}

void OscillatorParams::validate() const {
  require_positive(omega0, "omega0");
  require_positive(coupling, "coupling b^2/2I");
  if (kappa) require_positive(*kappa, "kappa");
  if (inertia) require_positive(*inertia, "moment of inertia");
  if (lever) require_positive(*lever, "lever arm");
  if (quality) require_positive(*quality, "quality factor");
  if (kappa && inertia && !within(omega0, std::sqrt(*kappa / *inertia), kConsistency)) {
    std::ostringstream os;
    os << "omega0 = " << omega0 << " rad/s disagrees with sqrt(kappa/I) = "
       << std::sqrt(*kappa / *inertia) << " rad/s by more than 2%";
    throw DomainError(os.str());
  }
  if (lever && inertia &&
      !within(coupling, *lever * *lever / (2.0 * *inertia), kConsistency)) {
    std::ostringstream os;
    os << "coupling = " << coupling << " 1/kg disagrees with b^2/2I = "
       << *lever * *lever / (2.0 * *inertia) << " 1/kg by more than 2%";
    throw DomainError(os.str());
  }
}

OscillatorParams OscillatorParams::reference() {
  OscillatorParams p{};
  p.omega0 = 2.0 * pi * 687.23;
  p.coupling = 6.489e8;
  p.kappa = 8.6e-10;
  p.inertia = 4.6e-17;
  p.lever = std::sqrt(2.0 * *p.inertia * p.coupling);
  return p;
}

double separation(const SeparationModel& sm) {
  if (!(std::abs(sm.theta) <= kMaxTheta)) {
    throw DomainError("tilt angle exceeds the small-angle limit of 0.01 rad");
  }
  if (!(sm.lever >= 0.0)) throw DomainError("lever arm must be non-negative");
  return sm.z_fiber - sm.z_contact - sm.z_gap - sm.lever * sm.theta;
}

double resonant_frequency(const OscillatorParams& p, double gradient) {
  p.validate();
  const double frac = p.shift_per_gradient() * gradient;
  if (!(std::abs(frac) < kMaxFractionalShift)) {
    std::ostringstream os;
    os << "force gradient " << gradient
       << " N/m is outside the linear response range (fractional shift " << frac
       << "); use a smaller gradient";
    throw DomainError(os.str());
  }
  return p.omega0 * (1.0 - frac);
}

double gradient_from_shift(const OscillatorParams& p, double delta_omega) {
  p.validate();
  const double frac = -delta_omega / p.omega0;
  if (!(std::abs(frac) < kMaxFractionalShift)) {
    throw DomainError("frequency shift is outside the linear response range");
  }
  return frac / p.shift_per_gradient();
}

double gradient_from_frequency(const OscillatorParams& p, double omega_r) {
  return gradient_from_shift(p, omega_r - p.omega0);
}

double min_detectable_gradient(const OscillatorParams& p, double delta_f_min_hz) {
  p.validate();
  require_positive(delta_f_min_hz, "minimum frequency shift");
  const double f0 = p.omega0 / (2.0 * pi);
  return (delta_f_min_hz / f0) / p.shift_per_gradient();
}

double default_amplitude(double z_metal) {
  constexpr double z_lo = 0.2e-6, z_hi = 1.2e-6;
  constexpr double a_lo = 3e-9, a_hi = 35e-9;
  if (z_metal <= z_lo) return a_lo;
  if (z_metal >= z_hi) return a_hi;
  return a_lo + (a_hi - a_lo) * (z_metal - z_lo) / (z_hi - z_lo);
}

void SweepConfig::validate() const {
  if (z_grid.empty()) throw ConfigError("sweep grid is empty");
  if (!(integration_time > 0.0)) throw ConfigError("integration time must be positive");
  if (!(noise.freq_noise >= 0.0) || !(noise.separation_noise >= 0.0)) {
    throw ConfigError("noise magnitudes must be non-negative");
  }
  if (!amplitude) throw ConfigError("no drive amplitude schedule");
  std::ostringstream bad;
  std::size_t violations = 0;
  for (std::size_t i = 0; i < z_grid.size(); ++i) {
    const double z = z_grid[i];
    if (!(z > 0.0)) {
      bad << "\n  point " << i << ": z = " << z << " m is not positive";
      ++violations;
      continue;
    }
    const double a = amplitude(z);
    if (!(a > 0.0) || !(a < z / 5.0)) {
      bad << "\n  point " << i << ": z = " << z << " m, A = " << a
          << " m violates 0 < A < z/5";
      ++violations;
    }
  }
  if (violations > 0) {
    throw ConfigError("drive amplitude guard failed at " + std::to_string(violations) +
                      " point(s):" + bad.str());
  }
}

std::vector<SweepPoint> simulate_sweep(const SweepConfig& cfg, const SweepModel& model,
                                       std::uint64_t seed, unsigned threads) {
  cfg.validate();
  model.params.validate();
  if (!(model.geometry.radius > 0.0) || !(model.geometry.delta0 >= 0.0)) {
    throw DomainError("sweep geometry needs R > 0 and delta0 >= 0");
  }
  const double sigma_f = cfg.noise.freq_noise / std::sqrt(cfg.integration_time);
  const double sigma_omega = 2.0 * pi * sigma_f;

  std::vector<SweepPoint> out(cfg.z_grid.size());
  parallel_for(cfg.z_grid.size(), threads, [&](std::size_t i) {
    std::mt19937_64 rng(mix(seed ^ mix(static_cast<std::uint64_t>(i))));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double dz = cfg.noise.separation_noise > 0.0
                          ? cfg.noise.separation_noise * normal(rng) : 0.0;
    const double df = sigma_omega > 0.0 ? sigma_omega * normal(rng) : 0.0;

    SweepPoint pt{};
    pt.z_metal = cfg.z_grid[i];
    pt.z_actual = pt.z_metal + dz;
    const double z = pt.z_actual + 2.0 * model.geometry.delta0;
    const double pressure = roughness::averaged_pressure(
        z, model.roughness, model.sphere, model.plate, model.quadrature);
    pt.gradient = 2.0 * pi * model.geometry.radius * std::abs(pressure);
    // Linear-domain check via the forward map.
    resonant_frequency(model.params, pt.gradient);
    const double clean_shift =
        -model.params.omega0 * model.params.shift_per_gradient() * pt.gradient;
    pt.delta_omega = clean_shift + df;
    pt.omega_r = model.params.omega0 + pt.delta_omega;
    pt.sigma_omega = sigma_omega;
    out[i] = pt;
  });
  return out;
}

std::vector<double> invert_sweep(const OscillatorParams& p,
                                 const std::vector<SweepPoint>& points) {
  std::vector<double> g;
  g.reserve(points.size());
  for (const auto& pt : points) g.push_back(gradient_from_shift(p, pt.delta_omega));
  return g;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << "z_m,f_hz,sigma_hz\n";
  char buf[96];
  for (const auto& pt : points) {
    std::snprintf(buf, sizeof buf, "%.17e,%.17e,%.17e\n", pt.z_metal,
                  pt.omega_r / (2.0 * pi), pt.sigma_omega / (2.0 * pi));
    out << buf;
  }
}

}  // namespace casimir::oscillator
