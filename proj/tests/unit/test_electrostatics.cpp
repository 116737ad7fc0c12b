#include "doctest.h"

#include "casimir/constants.hpp"
#include "casimir/electrostatics.hpp"
#include "casimir/errors.hpp"
#include "generators.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

using namespace casimir;
using namespace casimir::electrostatics;

namespace {

constexpr double kR = 294.3e-6;
const CalibrationParams kTruth{50280.0, 0.6325, 294.3e-6, 39.4e-9};
const std::vector<double> kZ{0.3e-6, 0.6e-6, 1e-6, 2e-6, 4e-6};
const std::vector<double> kV{-0.2, 0.1, 0.4, 0.9, 1.3, 1.8};

// The series summed term by term in extended precision with the library's
// hyperbolic functions, as a reference for the recurrence-based sum.
long double naive_series(long double x, int terms) {
  const long double u = std::acosh(1.0L + x);
  long double s = 0.0L;
  for (int n = 1; n <= terms; ++n) {
    const long double nu = n * u;
    s -= (1.0L / std::tanh(u) - n / std::tanh(nu)) / std::sinh(nu);
  }
  return s;
}

ElectrostaticConfig config(double v, double v0, double z, double delta0 = 0.0) {
  return {v, v0, {kR, z, delta0}, 1e-13};
}

}  // namespace

TEST_CASE("series agrees with a direct extended-precision sum") {
  for (double x : {0.0034, 0.02, 0.1, 0.5, 2.0}) {
    const int terms = static_cast<int>(60.0 / std::acosh(1.0 + x)) + 10;
    CHECK(series_sum(x) == doctest::Approx(static_cast<double>(naive_series(x, terms))).epsilon(1e-11));
  }
}

TEST_CASE("force is zero at the residual potential and quadratic in voltage") {
  CHECK(electrostatic_force(config(0.6325, 0.6325, 1e-6)) == 0.0);
  testgen::Gen gen(3);
  for (int i = 0; i < 20; ++i) {
    const double v = gen.uniform(-2.0, 2.0), v0 = gen.uniform(-1.0, 1.0);
    const double z = gen.log_uniform(50e-9, 20e-6);
    const double f1 = electrostatic_force(config(v, v0, z));
    const double f2 = electrostatic_force(config(v0 + 2 * (v - v0), v0, z));
    CHECK(f1 >= 0.0);
    CHECK(f2 == doctest::Approx(4 * f1).epsilon(1e-14));
  }
}

TEST_CASE("small-gap asymptote") {
  // (V - V0) = 0.3 V across 1 um at R = 294.3 um.
  const double f = electrostatic_force(1e-6, 0.3, kR, 0.0);
  const double asym = pi * PhysicalConstants::eps0 * 0.09 * kR / 1e-6;
  CHECK(asym == doctest::Approx(7.37e-10).epsilon(1e-3));
  CHECK(std::abs(f - asym) / asym < 0.02);
  CHECK(f < asym);
  // delta0 enters only through the combined gap.
  CHECK(electrostatic_force(0.9e-6, 0.3, kR, 0.05e-6) == doctest::Approx(f).epsilon(1e-14));
}

TEST_CASE("force decreases with separation") {
  double prev = INFINITY;
  for (double z = 20e-9; z < 50e-6; z *= 1.3) {
    const double f = electrostatic_force(config(1.0, 0.0, z));
    CHECK(f < prev);
    prev = f;
  }
}

TEST_CASE("partial sums are monotone after the first term for d/R < 0.1") {
  for (double x : testgen::log_grid(1e-4, 0.099, 30)) {
    const auto rep = series_truncation_report(config(1.0, 0.0, x * kR));
    REQUIRE(rep.partial_sums.size() >= 2);
    for (std::size_t i = 2; i < rep.partial_sums.size(); ++i) {
      CHECK(rep.partial_sums[i].partial_sum >= rep.partial_sums[i - 1].partial_sum);
    }
    CHECK(rep.partial_sums.back().partial_sum == rep.series_value);
  }
}

TEST_CASE("expansion orders needed for 0.1% accuracy") {
  const auto nominal = series_truncation_report(config(1.0, 0.0, 0.0034 * kR));
  CHECK(nominal.orders_needed == 2);
  CHECK(nominal.expansion[0].rel_error > 1e-3);
  CHECK(nominal.expansion[1].rel_error < 1e-3);

  for (double x : {0.1, 0.15}) {
    const auto rep = series_truncation_report(config(1.0, 0.0, x * kR));
    CHECK(rep.orders_needed > 2);
    CHECK(rep.expansion[1].rel_error > 1e-3);
  }

  // Leading term takes over as the gap closes.
  double prev = INFINITY;
  for (double x : {1e-2, 1e-3, 1e-4, 1e-5}) {
    const double err = std::abs(small_gap_expansion(x, 1) / series_sum(x) - 1.0);
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 1e-4);
  CHECK_THROWS_AS(small_gap_expansion(0.1, 0), DomainError);
  CHECK_THROWS_AS(small_gap_expansion(0.1, 4), DomainError);
}

TEST_CASE("series input checks") {
  CHECK_THROWS_AS(electrostatic_force(ElectrostaticConfig{1.0, 0.0, {kR, 1e-6, 0.0}, 1e-5}),
                  DomainError);
  CHECK_THROWS_AS(electrostatic_force(-1e-6, 1.0, kR, 0.0), DomainError);
  CHECK_THROWS_AS(series_sum(0.0), DomainError);
  CHECK_THROWS_AS(series_sum(1e-12), ConvergenceError);
}

TEST_CASE("noiseless calibration round trip") {
  const auto samples = synthesize_samples(kTruth, kZ, kV);
  const auto guess = initial_guess(samples, 300e-6);
  CHECK(guess.v0 == doctest::Approx(kTruth.v0).epsilon(1e-9));
  CHECK(guess.delta0 == 0.0);
  const auto fit = calibrate(samples, guess);
  CHECK(fit.k == doctest::Approx(kTruth.k).epsilon(1e-6));
  CHECK(fit.v0 == doctest::Approx(kTruth.v0).epsilon(1e-6));
  CHECK(fit.radius == doctest::Approx(kTruth.radius).epsilon(1e-6));
  CHECK(fit.delta0 == doctest::Approx(kTruth.delta0).epsilon(1e-6));

  Eigen::Matrix4d cov;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) cov(i, j) = fit.covariance[i][j];
  }
  CHECK((cov - cov.transpose()).norm() <= 1e-12 * cov.norm());
  const Eigen::Vector4d eig = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(cov).eigenvalues();
  CHECK(eig.minCoeff() >= -1e-12 * eig.cwiseAbs().maxCoeff());
}

TEST_CASE("noisy calibration recovers k") {
  auto samples = synthesize_samples(kTruth, kZ, kV);
  testgen::Gen gen(17);
  for (auto& s : samples) s.delta_c *= 1.0 + gen.normal(0.0, 1.0 / 5e5);
  const auto fit = calibrate(samples, initial_guess(samples, 300e-6));
  CHECK(std::abs(fit.k / kTruth.k - 1.0) < 5e-4);
  const auto sigma = fit.sigma();
  CHECK(sigma[0] > 0.0);
  CHECK(fit.residual_rms > 0.0);
}

TEST_CASE("calibration identifiability") {
  const std::vector<double> one_v{0.9};
  CHECK_THROWS_AS(calibrate(synthesize_samples(kTruth, kZ, one_v), kTruth), IdentifiabilityError);
  const std::vector<double> two_z{1e-6};
  const std::vector<double> three_v{0.1, 0.9, 1.5};
  CHECK_THROWS_AS(calibrate(synthesize_samples(kTruth, two_z, three_v), kTruth),
                  IdentifiabilityError);
  // Four pairs but at a single separation: R and delta0 are degenerate.
  const std::vector<double> four_v{0.1, 0.5, 0.9, 1.5};
  CHECK_THROWS_AS(calibrate(synthesize_samples(kTruth, two_z, four_v), kTruth),
                  IdentifiabilityError);
}

TEST_CASE("fit failure carries a trace") {
  const auto samples = synthesize_samples(kTruth, kZ, kV);
  FitOptions opts;
  opts.max_evaluations = 3;
  try {
    calibrate(samples, {40000.0, 0.2, 250e-6, 0.0}, opts);
    FAIL("expected FitError");
  } catch (const FitError& e) {
    CHECK(std::string(e.what()).find("evaluations") != std::string::npos);
  }
}

TEST_CASE("calibration CSV") {
  std::istringstream ok("z_metal_m,v_applied_v,delta_c_f\n1e-6,0.5,2e-15\n2e-6,0.7,1e-15\n");
  const auto s = parse_calibration_csv(ok, "cal");
  REQUIRE(s.size() == 2);
  CHECK(s[1].v_applied == 0.7);
  std::istringstream bad_header("z,v,c\n");
  CHECK_THROWS_AS(parse_calibration_csv(bad_header, "cal"), ParseError);
  std::istringstream bad_row("z_metal_m,v_applied_v,delta_c_f\n1e-6,0.5\n");
  try {
    parse_calibration_csv(bad_row, "cal");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream neg("z_metal_m,v_applied_v,delta_c_f\n-1e-6,0.5,1e-15\n");
  CHECK_THROWS_AS(parse_calibration_csv(neg, "cal"), ValidationError);
  CHECK_THROWS_AS(load_calibration_csv("/nonexistent/cal.csv"), IoError);
}
