#pragma once

// Hand-rolled generators for the property tests. Fixed seeds keep failures
// reproducible; each test owns its own stream.

#include "casimir/materials.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace testgen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(rng_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::uint64_t bits() { return rng_(); }

 private:
  std::mt19937_64 rng_;
};

inline std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  return g;
}

// eps''(omega) of one Lorentz oscillator, f in eV^2.
inline double lorentz_eps_imag(double w, double w0, double gamma, double f) {
  const double d = w0 * w0 - w * w;
  return f * gamma * w / (d * d + gamma * gamma * w * w);
}

// Its imaginary-axis permittivity, 1 + f / (w0^2 + xi^2 + gamma xi).
inline double lorentz_eps(double xi, double w0, double gamma, double f) {
  return 1.0 + f / (w0 * w0 + xi * xi + gamma * xi);
}

inline casimir::materials::OpticalTable tabulate(
    const std::vector<double>& energies, auto&& eps_imag) {
  std::vector<casimir::materials::OpticalRow> rows;
  rows.reserve(energies.size());
  for (double e : energies) rows.push_back({e, eps_imag(e)});
  return casimir::materials::OpticalTable(std::move(rows), "generated");
}

}  // namespace testgen
