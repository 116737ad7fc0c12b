#pragma once

// Dielectric response of the metals on the imaginary frequency axis.
//
// Energies are in eV throughout this header: photon energies of optical
// tables, Drude parameters (hbar*omega_p, hbar*gamma), and the imaginary
// frequency xi itself (hbar*xi). The Lifshitz layer converts to rad/s.

#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace casimir::materials {

struct OpticalRow {
  double energy_ev;
  double eps_imag;
};

/// Imaginary part of the permittivity sampled on a strictly increasing
/// photon-energy grid. Immutable once constructed.
class OpticalTable {
 public:
  /// Throws ValidationError if energies are not strictly increasing and
  /// positive, or if any eps_imag is negative or non-finite.
  explicit OpticalTable(std::vector<OpticalRow> rows, std::string source = {});

  std::span<const OpticalRow> rows() const { return rows_; }
  std::size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const std::string& source() const { return source_; }
  double min_energy() const;
  double max_energy() const;

  /// Linear interpolation of eps_imag; energy must lie inside the table.
  double eps_imag_at(double energy_ev) const;

 private:
  std::vector<OpticalRow> rows_;
  std::string source_;
};

struct DrudeParams {
  double plasma_energy;     // hbar * omega_p, eV
  double relaxation_energy; // hbar * gamma, eV

  /// Throws DomainError unless both energies are positive and finite.
  void validate() const;
};

// Conventional literature values, not fitted to any particular sample.
inline constexpr DrudeParams kDefaultGold{9.0, 0.035};
inline constexpr DrudeParams kDefaultCopper{8.9, 0.030};

/// Drude permittivity on the imaginary axis, 1 + wp^2 / (xi (xi + gamma)).
/// gamma = 0 is accepted here (plasma limit); xi must be positive.
double drude_eps(double xi_ev, const DrudeParams& params);

/// Drude eps''(omega) = wp^2 gamma / (omega (omega^2 + gamma^2)).
double drude_eps_imag(double omega_ev, const DrudeParams& params);

/// Numerical dispersion integral (2/pi) int_0^upper w eps''_D(w)/(w^2+xi^2) dw
/// of the analytic Drude loss, by adaptive quadrature on log-spaced panels.
/// Pass upper = +inf for the full integral, which reproduces drude_eps.
double drude_dispersion_integral(const DrudeParams& params, double xi_ev,
                                 double upper_ev);

/// eps(i xi) from the dispersion relation: Drude loss below splice_ev,
/// trapezoid over the table from splice_ev to the last row, and an
/// omega^-3 continuation of the last row beyond the table.
/// splice_ev defaults to the first tabulated energy.
double kk_to_imaginary_axis(const OpticalTable& table, const DrudeParams& drude,
                            double xi_ev,
                            std::optional<double> splice_ev = std::nullopt);

struct PerfectConductor {};

struct DrudeOnly {
  DrudeParams params;
};

struct Tabulated {
  std::shared_ptr<const OpticalTable> table;
  DrudeParams drude;
  double splice_energy;
};

class DielectricModel {
 public:
  using Variant = std::variant<PerfectConductor, DrudeOnly, Tabulated>;

  static DielectricModel perfect_conductor();
  static DielectricModel drude(const DrudeParams& params);
  /// Throws ConfigError for an empty table or a splice energy outside it.
  static DielectricModel tabulated(OpticalTable table, const DrudeParams& drude,
                                   std::optional<double> splice_ev = std::nullopt);

  bool is_perfect_conductor() const {
    return std::holds_alternative<PerfectConductor>(variant_);
  }
  const Variant& variant() const { return variant_; }

  /// eps(i xi) for xi > 0 in eV. A perfect conductor evaluates to +inf;
  /// the Lifshitz code never asks it for a value.
  double operator()(double xi_ev) const;

  std::string describe() const;

 private:
  explicit DielectricModel(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

/// Parses the `energy_ev,eps2` CSV format. Rows are validated and must
/// arrive sorted; duplicates and negative losses are rejected.
OpticalTable parse_optical_data(std::istream& in, const std::string& source);

/// Throws IoError if the file cannot be opened.
OpticalTable load_optical_data(const std::filesystem::path& path);

/// Named dielectric models loaded from a JSON registry document.
///
///   { "materials": {
///       "Au":    { "model": "drude", "plasma_ev": 9.0, "relaxation_ev": 0.035 },
///       "ideal": { "model": "perfect" },
///       "Au-t":  { "model": "tabulated", "plasma_ev": 9.0,
///                  "relaxation_ev": 0.035, "data": "au_eps2.csv",
///                  "splice_ev": 0.125 } } }
///
/// Relative data paths resolve against `data_root`.
class MaterialRegistry {
 public:
  /// Perfect conductor plus Drude gold and copper at their default values.
  static MaterialRegistry builtin();

  static MaterialRegistry parse(std::istream& in,
                                const std::filesystem::path& data_root);

  /// data_root is $CASIMIR_DATA_DIR when set, else the registry's directory.
  static MaterialRegistry load(const std::filesystem::path& path);

  /// Throws ConfigError naming the known materials if `name` is absent.
  const DielectricModel& at(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;

  void add(const std::string& name, DielectricModel model);

 private:
  std::map<std::string, DielectricModel> models_;
};

}  // namespace casimir::materials
