#include "casimir/electrostatics.hpp"

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/LevenbergMarquardt>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace casimir::electrostatics {

namespace {

constexpr std::size_t kMaxTerms = 100000;

// Calls `visit(n, partial)` after each term. Terms are built from
// q = e^{-u} by recurrence; 1 - q^{2n} is accumulated from positive pieces
// so it stays accurate for small n*u.
template <class Visit>
double sum_series(double x, double tol, Visit&& visit) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("electrostatic series: gap must be positive");
  }
  const double u = std::acosh(1.0 + x);
  const double q = std::exp(-u);
  const double q2 = q * q;
  const double one_minus_q2 = -std::expm1(-2.0 * u);
  const double coth_u = (2.0 - one_minus_q2) / one_minus_q2;
  // Tail of a geometric-like series with ratio ~q.
  const double tail_factor = 1.0 / (1.0 - q);

  double qn = 1.0;      // q^n
  double q2n = 1.0;     // q^{2n}
  double d = 0.0;       // 1 - q^{2n}
  double sum = 0.0;
  for (std::size_t n = 1; n <= kMaxTerms; ++n) {
    qn *= q;
    d += q2n * one_minus_q2;
    q2n *= q2;
    const double nd = static_cast<double>(n);
    const double coth_nu = (2.0 - d) / d;
    const double csch_nu = 2.0 * qn / d;
    const double term = (nd * coth_nu - coth_u) * csch_nu;
    sum += term;
    visit(n, sum);
    // Terms grow until n u ~ 1 and decay geometrically afterwards.
    if (nd * u > 1.0 && std::abs(term) * tail_factor < tol * std::abs(sum)) {
      return sum;
    }
  }
  throw ConvergenceError("electrostatic series did not converge", sum, 1.0);
}

}  // namespace

void ElectrostaticConfig::validate() const {
  if (!(series_tol > 0.0 && series_tol <= 1e-6)) {
    throw DomainError("series_tol must lie in (0, 1e-6]");
  }
  if (!(geometry.radius > 0.0)) throw DomainError("sphere radius must be positive");
  if (!(geometry.delta0 >= 0.0)) throw DomainError("delta0 must be non-negative");
  if (!(geometry.corrected_separation() > 0.0)) {
    throw DomainError("z_metal + 2 delta0 must be positive");
  }
}

double series_sum(double gap_over_radius, double series_tol) {
  return sum_series(gap_over_radius, series_tol, [](std::size_t, double) {});
}

double electrostatic_force(double z_metal, double voltage_difference,
                           double radius, double delta0, double series_tol) {
  if (!(radius > 0.0)) throw DomainError("sphere radius must be positive");
  const double gap = z_metal + 2.0 * delta0;
  if (!(gap > 0.0)) throw DomainError("z_metal + 2 delta0 must be positive");
  if (voltage_difference == 0.0) return 0.0;
  const double s = series_sum(gap / radius, series_tol);
  return 2.0 * pi * PhysicalConstants::eps0 * voltage_difference *
         voltage_difference * s;
}

double electrostatic_force(const ElectrostaticConfig& cfg) {
  cfg.validate();
  return electrostatic_force(cfg.geometry.separation, cfg.v_applied - cfg.v_residual,
                             cfg.geometry.radius, cfg.geometry.delta0,
                             cfg.series_tol);
}

double small_gap_expansion(double x, int order) {
  if (!(x > 0.0)) throw DomainError("expansion needs a positive gap");
  if (order < 1 || order > kMaxExpansionOrder) {
    throw DomainError("expansion order must be 1.." + std::to_string(kMaxExpansionOrder));
  }
  constexpr double ln2 = std::numbers::ln2;
  constexpr double euler = std::numbers::egamma;
  const double lx = std::log(x);
  double s = 0.5 / x;
  if (order >= 2) s += lx / 6.0 + 1.0 / 18.0 - ln2 / 6.0 - euler / 3.0;
  if (order >= 3) {
    s += x * (-lx / 45.0 - 7.0 / 150.0 + ln2 / 45.0 + 2.0 * euler / 45.0);
  }
  return s;
}

TruncationReport series_truncation_report(const ElectrostaticConfig& cfg,
                                          double threshold) {
  cfg.validate();
  TruncationReport report{};
  report.gap_over_radius = cfg.geometry.corrected_separation() / cfg.geometry.radius;
  report.threshold = threshold;
  report.series_value = sum_series(
      report.gap_over_radius, cfg.series_tol, [&report](std::size_t n, double s) {
        report.partial_sums.push_back({n, s});
      });
  for (int order = 1; order <= kMaxExpansionOrder; ++order) {
    const double v = small_gap_expansion(report.gap_over_radius, order);
    const double err = std::abs(v - report.series_value) / report.series_value;
    report.expansion.push_back({order, v, err});
    if (report.orders_needed == 0 && err < threshold) report.orders_needed = order;
  }
  return report;
}

std::array<double, 4> CalibrationFit::sigma() const {
  std::array<double, 4> s{};
  for (std::size_t i = 0; i < 4; ++i) s[i] = std::sqrt(std::max(covariance[i][i], 0.0));
  return s;
}

namespace {

// Parameters are fitted in units of their starting scale so the normal
// equations are well balanced.
struct Scaling {
  std::array<double, 4> scale;

  CalibrationParams to_physical(const Eigen::VectorXd& x) const {
    return {x[0] * scale[0], x[1] * scale[1], x[2] * scale[2], x[3] * scale[3]};
  }
};

constexpr double kRejectResidual = 1e6;

struct CalibrationFunctor : Eigen::DenseFunctor<double> {
  CalibrationFunctor(std::span<const CalibrationSample> samples, Scaling scaling,
                     double force_scale, double step)
      : Eigen::DenseFunctor<double>(4, static_cast<int>(samples.size())),
        samples(samples), scaling(scaling), force_scale(force_scale), step(step) {}

  std::span<const CalibrationSample> samples;
  Scaling scaling;
  double force_scale;
  double step;

  int operator()(const InputType& x, ValueType& fvec) const {
    const auto p = scaling.to_physical(x);
    // Trial steps into the unphysical region get a large flat residual so
    // the minimizer shrinks its step instead of aborting.
    auto reject = [&fvec] {
      fvec.setConstant(kRejectResidual);
      return 0;
    };
    if (!(p.radius > 0.0)) return reject();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      if (!(s.z_metal + 2.0 * p.delta0 > 0.0)) return reject();
      const double fe =
          electrostatic_force(s.z_metal, s.v_applied - p.v0, p.radius, p.delta0);
      fvec[static_cast<Eigen::Index>(i)] = (p.k * s.delta_c - fe) / force_scale;
    }
    return 0;
  }

  int df(const InputType& x, JacobianType& fjac) const {
    ValueType plus(values()), minus(values());
    for (Eigen::Index j = 0; j < 4; ++j) {
      const double h = step * std::max(std::abs(x[j]), 1.0);
      InputType xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      (*this)(xp, plus);
      (*this)(xm, minus);
      fjac.col(j) = (plus - minus) / (2.0 * h);
    }
    return 0;
  }
};

void check_design(std::span<const CalibrationSample> samples) {
  std::set<double> voltages;
  std::set<std::pair<double, double>> pairs;
  for (const auto& s : samples) {
    if (!std::isfinite(s.z_metal) || !std::isfinite(s.v_applied) ||
        !std::isfinite(s.delta_c) || !(s.z_metal > 0.0)) {
      throw ValidationError("calibration sample with invalid values");
    }
    voltages.insert(s.v_applied);
    pairs.insert({s.z_metal, s.v_applied});
  }
  if (voltages.size() < 2) {
    throw IdentifiabilityError(
        "calibration needs at least two applied voltages: k and V0 are degenerate");
  }
  if (pairs.size() < 4) {
    throw IdentifiabilityError("calibration needs at least four distinct (z, V) pairs");
  }
}

}  // namespace

CalibrationFit calibrate(std::span<const CalibrationSample> samples,
                         const CalibrationParams& guess, const FitOptions& options) {
  check_design(samples);
  if (!(guess.k > 0.0) || !(guess.radius > 0.0) || !(guess.delta0 >= 0.0)) {
    throw DomainError("initial guess needs k > 0, R > 0, delta0 >= 0");
  }

  Scaling scaling{{guess.k, std::max(std::abs(guess.v0), 0.1), guess.radius,
                   std::max(guess.delta0, 1e-8)}};
  double force_scale = 0.0;
  for (const auto& s : samples) force_scale += (guess.k * s.delta_c) * (guess.k * s.delta_c);
  force_scale = std::sqrt(force_scale / static_cast<double>(samples.size()));
  if (!(force_scale > 0.0)) throw ValidationError("calibration data carry no force");

  CalibrationFunctor functor(samples, scaling, force_scale, options.jacobian_step);
  Eigen::VectorXd x(4);
  x << guess.k / scaling.scale[0], guess.v0 / scaling.scale[1],
      guess.radius / scaling.scale[2], guess.delta0 / scaling.scale[3];

  Eigen::LevenbergMarquardt<CalibrationFunctor> lm(functor);
  lm.setXtol(options.xtol);
  lm.setFtol(options.ftol);
  lm.setGtol(0.0);
  lm.setFactor(1.0);
  lm.setMaxfev(static_cast<Eigen::Index>(options.max_evaluations));
  const auto status = lm.minimize(x);
  using Status = Eigen::LevenbergMarquardtSpace::Status;
  const bool ok = status == Status::RelativeReductionTooSmall ||
                  status == Status::RelativeErrorTooSmall ||
                  status == Status::RelativeErrorAndReductionTooSmall ||
                  status == Status::FtolTooSmall || status == Status::XtolTooSmall ||
                  status == Status::GtolTooSmall || status == Status::CosinusTooSmall;
  if (!ok) {
    std::ostringstream os;
    os << "calibration fit failed: status " << static_cast<int>(status) << " after "
       << lm.nfev() << " evaluations, " << lm.iterations()
       << " iterations; last residual norm " << lm.fnorm() * force_scale << " N";
    throw FitError(os.str());
  }

  const auto p = scaling.to_physical(x);
  Eigen::MatrixXd jac(functor.values(), 4);
  Eigen::VectorXd resid(functor.values());
  functor(x, resid);
  functor.df(x, jac);
  if (resid.cwiseAbs().maxCoeff() >= kRejectResidual) {
    throw FitError("calibration fit left the physical domain");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
  const auto& sv = svd.singularValues();
  if (!(sv[3] > 1e-10 * sv[0])) {
    throw IdentifiabilityError("calibration Jacobian is rank deficient at the optimum");
  }

  const auto n = static_cast<double>(samples.size());
  const double rss = resid.squaredNorm();
  const double dof = std::max(n - 4.0, 1.0);
  const Eigen::Matrix4d jtj = jac.transpose() * jac;
  const Eigen::Matrix4d cov_scaled = (rss / dof) * jtj.inverse();

  CalibrationFit fit{};
  fit.k = p.k;
  fit.v0 = p.v0;
  fit.radius = p.radius;
  fit.delta0 = p.delta0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      fit.covariance[i][j] = cov_scaled(i, j) * scaling.scale[i] * scaling.scale[j];
    }
  }
  fit.residual_rms = std::sqrt(rss / n) * force_scale;
  fit.iterations = static_cast<std::size_t>(lm.iterations());
  if (fit.radius <= 0.0 || fit.k <= 0.0) throw FitError("fit converged to unphysical k or R");
  // delta0 is a physical gap; a tiny negative excursion is fit noise.
  if (fit.delta0 < 0.0) fit.delta0 = 0.0;
  return fit;
}

CalibrationParams initial_guess(std::span<const CalibrationSample> samples,
                                double nominal_radius) {
  if (samples.empty()) throw ValidationError("no calibration samples");
  std::map<double, std::vector<const CalibrationSample*>> by_z;
  for (const auto& s : samples) by_z[s.z_metal].push_back(&s);

  // Vertex of a least-squares parabola dC = a V^2 + b V + c.
  double v0_sum = 0.0;
  int v0_count = 0;
  for (const auto& [z, group] : by_z) {
    std::set<double> vs;
    for (const auto* s : group) vs.insert(s->v_applied);
    if (vs.size() < 3) continue;
    Eigen::MatrixXd a(group.size(), 3);
    Eigen::VectorXd b(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) {
      const double v = group[i]->v_applied;
      a.row(static_cast<Eigen::Index>(i)) << v * v, v, 1.0;
      b[static_cast<Eigen::Index>(i)] = group[i]->delta_c;
    }
    const Eigen::Vector3d coef = a.colPivHouseholderQr().solve(b);
    if (coef[0] != 0.0) {
      v0_sum += -coef[1] / (2.0 * coef[0]);
      ++v0_count;
    }
  }
  CalibrationParams guess{0.0, v0_count > 0 ? v0_sum / v0_count : 0.0, nominal_radius, 0.0};

  std::vector<double> ratios;
  for (const auto& s : samples) {
    if (s.delta_c == 0.0) continue;
    const double fe = electrostatic_force(s.z_metal, s.v_applied - guess.v0,
                                          nominal_radius, 0.0);
    if (fe > 0.0) ratios.push_back(fe / s.delta_c);
  }
  if (ratios.empty()) throw ValidationError("calibration data carry no force");
  std::nth_element(ratios.begin(), ratios.begin() + ratios.size() / 2, ratios.end());
  guess.k = std::abs(ratios[ratios.size() / 2]);
  return guess;
}

std::vector<CalibrationSample> synthesize_samples(const CalibrationParams& truth,
                                                  std::span<const double> z_grid,
                                                  std::span<const double> voltages) {
  std::vector<CalibrationSample> out;
  out.reserve(z_grid.size() * voltages.size());
  for (double z : z_grid) {
    for (double v : voltages) {
      const double fe = electrostatic_force(z, v - truth.v0, truth.radius, truth.delta0);
      out.push_back({z, v, fe / truth.k});
    }
  }
  return out;
}

std::vector<CalibrationSample> parse_calibration_csv(std::istream& in,
                                                     const std::string& source) {
  std::vector<CalibrationSample> out;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!have_header) {
      if (line != "z_metal_m,v_applied_v,delta_c_f") {
        throw ParseError(source + ": expected header 'z_metal_m,v_applied_v,delta_c_f'",
                         line_no);
      }
      have_header = true;
      continue;
    }
    std::array<double, 3> v{};
    std::istringstream row(line);
    std::string field;
    std::size_t i = 0;
    while (std::getline(row, field, ',')) {
      if (i >= 3) throw ParseError(source + ": too many fields", line_no);
      try {
        std::size_t used = 0;
        v[i] = std::stod(field, &used);
        if (field.find_first_not_of(" \t", used) != std::string::npos) {
          throw std::invalid_argument(field);
        }
      } catch (const std::logic_error&) {
        throw ParseError(source + ": malformed number '" + field + "'", line_no);
      }
      ++i;
    }
    if (i != 3) throw ParseError(source + ": expected three fields", line_no);
    if (!(v[0] > 0.0)) throw ValidationError(source + ": z_metal must be positive");
    out.push_back({v[0], v[1], v[2]});
  }
  if (!have_header) throw ParseError(source + ": empty calibration file", line_no + 1);
  return out;
}

std::vector<CalibrationSample> load_calibration_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration data: " + path.string());
  return parse_calibration_csv(in, path.string());
}

}  // namespace casimir::electrostatics
