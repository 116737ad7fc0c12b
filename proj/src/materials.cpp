#include "casimir/materials.hpp"

#include "casimir/constants.hpp"
#include "casimir/errors.hpp"
#include "casimir/quadrature.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace casimir::materials {

namespace {

constexpr double kDispersionRelTol = 1e-6;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// (1 - atan(t)/t) / t^2, the omega^-3 tail integral in units of the last
// tabulated loss value.
double tail_kernel(double t) {
  if (t < 1e-2) {
    const double t2 = t * t;
    return 1.0 / 3.0 - t2 / 5.0 + t2 * t2 / 7.0 - t2 * t2 * t2 / 9.0;
  }
  return (1.0 - std::atan(t) / t) / (t * t);
}

// Log-spaced breakpoints on [0, upper] that resolve the scales gamma and xi.
std::vector<double> drude_breaks(const DrudeParams& p, double xi_ev,
                                 double upper_ev) {
  std::vector<double> breaks{0.0};
  double edge = 1e-3 * std::min(p.relaxation_energy, xi_ev);
  while (edge < upper_ev) {
    breaks.push_back(edge);
    edge *= 4.0;
  }
  breaks.push_back(upper_ev);
  return breaks;
}

}  // namespace

OpticalTable::OpticalTable(std::vector<OpticalRow> rows, std::string source)
    : rows_(std::move(rows)), source_(std::move(source)) {
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto& r = rows_[i];
    if (!std::isfinite(r.energy_ev) || r.energy_ev <= 0.0) {
      throw ValidationError("optical table row " + std::to_string(i) +
                            ": photon energy must be positive and finite");
    }
    if (!std::isfinite(r.eps_imag) || r.eps_imag < 0.0) {
      throw ValidationError("optical table row " + std::to_string(i) +
                            ": eps2 must be non-negative and finite");
    }
    if (i > 0 && !(r.energy_ev > rows_[i - 1].energy_ev)) {
      throw ValidationError("optical table row " + std::to_string(i) +
                            ": photon energies must be strictly increasing");
    }
  }
}

double OpticalTable::min_energy() const {
  if (rows_.empty()) throw ConfigError("optical table is empty");
  return rows_.front().energy_ev;
}

double OpticalTable::max_energy() const {
  if (rows_.empty()) throw ConfigError("optical table is empty");
  return rows_.back().energy_ev;
}

double OpticalTable::eps_imag_at(double energy_ev) const {
  if (rows_.empty()) throw ConfigError("optical table is empty");
  if (energy_ev < min_energy() || energy_ev > max_energy()) {
    throw DomainError("energy outside optical table range");
  }
  auto hi = std::lower_bound(
      rows_.begin(), rows_.end(), energy_ev,
      [](const OpticalRow& r, double e) { return r.energy_ev < e; });
  if (hi->energy_ev == energy_ev) return hi->eps_imag;
  auto lo = hi - 1;
  const double f = (energy_ev - lo->energy_ev) / (hi->energy_ev - lo->energy_ev);
  return lo->eps_imag + f * (hi->eps_imag - lo->eps_imag);
}

void DrudeParams::validate() const {
  if (!(plasma_energy > 0.0) || !std::isfinite(plasma_energy)) {
    throw DomainError("Drude plasma energy must be positive");
  }
  if (!(relaxation_energy > 0.0) || !std::isfinite(relaxation_energy)) {
    throw DomainError("Drude relaxation energy must be positive");
  }
}

double drude_eps(double xi_ev, const DrudeParams& params) {
  if (!(xi_ev > 0.0)) throw DomainError("drude_eps: xi must be positive");
  if (!(params.plasma_energy > 0.0) || params.relaxation_energy < 0.0) {
    throw DomainError("drude_eps: invalid Drude parameters");
  }
  if (std::isinf(xi_ev)) return 1.0;
  const double wp = params.plasma_energy;
  return 1.0 + wp * wp / (xi_ev * (xi_ev + params.relaxation_energy));
}

double drude_eps_imag(double omega_ev, const DrudeParams& params) {
  if (!(omega_ev > 0.0)) throw DomainError("drude_eps_imag: omega must be positive");
  const double wp = params.plasma_energy;
  const double g = params.relaxation_energy;
  return wp * wp * g / (omega_ev * (omega_ev * omega_ev + g * g));
}

double drude_dispersion_integral(const DrudeParams& params, double xi_ev,
                                 double upper_ev) {
  params.validate();
  if (!(xi_ev > 0.0)) throw DomainError("dispersion integral: xi must be positive");
  if (!(upper_ev > 0.0)) return 0.0;
  const double wp2 = params.plasma_energy * params.plasma_energy;
  const double g = params.relaxation_energy;
  const double g2 = g * g;
  const double xi2 = xi_ev * xi_ev;
  // omega * eps''(omega), written without the 1/omega to stay finite at 0.
  auto integrand = [&](double w) {
    const double w2 = w * w;
    return wp2 * g / ((w2 + g2) * (w2 + xi2));
  };

  double finite_upper = upper_ev;
  double tail = 0.0;
  if (std::isinf(upper_ev)) {
    // Beyond this point the integrand is wp^2 g / w^4 to double precision.
    finite_upper = 1e4 * std::max({params.plasma_energy, xi_ev, g});
    tail = wp2 * g / (3.0 * finite_upper * finite_upper * finite_upper);
  }
  const auto breaks = drude_breaks(params, xi_ev, finite_upper);
  const auto est = quad::integrate_panels(integrand, breaks, kDispersionRelTol);
  return (2.0 / pi) * (est.value + tail);
}

double kk_to_imaginary_axis(const OpticalTable& table, const DrudeParams& drude,
                            double xi_ev, std::optional<double> splice_ev) {
  if (table.empty()) {
    throw ConfigError("dispersion integral needs a non-empty optical table");
  }
  if (!(xi_ev > 0.0)) throw DomainError("kk_to_imaginary_axis: xi must be positive");
  if (std::isinf(xi_ev)) return 1.0;
  const double splice = splice_ev.value_or(table.min_energy());
  if (splice < table.min_energy() || splice > table.max_energy()) {
    throw ConfigError("splice energy lies outside the optical table");
  }

  double sum = drude_dispersion_integral(drude, xi_ev, splice);

  const double xi2 = xi_ev * xi_ev;
  auto kernel = [xi2](double w, double eps2) { return w * eps2 / (w * w + xi2); };

  // Trapezoid over [splice, last row]; the data grid is the resolution.
  const auto rows = table.rows();
  double prev_w = splice;
  double prev_f = kernel(splice, table.eps_imag_at(splice));
  double trap = 0.0;
  for (const auto& r : rows) {
    if (r.energy_ev <= splice) continue;
    const double f = kernel(r.energy_ev, r.eps_imag);
    trap += 0.5 * (f + prev_f) * (r.energy_ev - prev_w);
    prev_w = r.energy_ev;
    prev_f = f;
  }
  sum += (2.0 / pi) * trap;

  const double e_max = table.max_energy();
  sum += (2.0 / pi) * rows.back().eps_imag * tail_kernel(xi_ev / e_max);
  return 1.0 + sum;
}

DielectricModel DielectricModel::perfect_conductor() {
  return DielectricModel(PerfectConductor{});
}

DielectricModel DielectricModel::drude(const DrudeParams& params) {
  params.validate();
  return DielectricModel(DrudeOnly{params});
}

DielectricModel DielectricModel::tabulated(OpticalTable table,
                                           const DrudeParams& drude,
                                           std::optional<double> splice_ev) {
  drude.validate();
  if (table.empty()) throw ConfigError("tabulated model needs optical data");
  const double splice = splice_ev.value_or(table.min_energy());
  if (splice < table.min_energy() || splice > table.max_energy()) {
    throw ConfigError("splice energy lies outside the optical table");
  }
  return DielectricModel(Tabulated{
      std::make_shared<const OpticalTable>(std::move(table)), drude, splice});
}

double DielectricModel::operator()(double xi_ev) const {
  if (!(xi_ev > 0.0)) throw DomainError("dielectric model: xi must be positive");
  return std::visit(
      [xi_ev](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PerfectConductor>) {
          return std::numeric_limits<double>::infinity();
        } else if constexpr (std::is_same_v<T, DrudeOnly>) {
          return drude_eps(xi_ev, v.params);
        } else {
          return kk_to_imaginary_axis(*v.table, v.drude, xi_ev, v.splice_energy);
        }
      },
      variant_);
}

std::string DielectricModel::describe() const {
  std::ostringstream os;
  std::visit(
      [&os](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PerfectConductor>) {
          os << "perfect conductor";
        } else if constexpr (std::is_same_v<T, DrudeOnly>) {
          os << "Drude(wp=" << v.params.plasma_energy
             << " eV, gamma=" << v.params.relaxation_energy << " eV)";
        } else {
          os << "tabulated(" << v.table->source() << ", " << v.table->size()
             << " rows, splice=" << v.splice_energy << " eV, Drude wp="
             << v.drude.plasma_energy << " eV, gamma="
             << v.drude.relaxation_energy << " eV)";
        }
      },
      variant_);
  return os.str();
}

OpticalTable parse_optical_data(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  std::vector<OpticalRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (!have_header) {
      if (text != "energy_ev,eps2") {
        throw ParseError("expected header 'energy_ev,eps2'", line_no);
      }
      have_header = true;
      continue;
    }
    const auto comma = text.find(',');
    if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
      throw ParseError("expected two comma-separated fields", line_no);
    }
    OpticalRow row{};
    try {
      std::size_t used = 0;
      const std::string a = trim(text.substr(0, comma));
      const std::string b = trim(text.substr(comma + 1));
      row.energy_ev = std::stod(a, &used);
      if (used != a.size()) throw std::invalid_argument(a);
      row.eps_imag = std::stod(b, &used);
      if (used != b.size()) throw std::invalid_argument(b);
    } catch (const std::logic_error&) {
      throw ParseError("malformed number", line_no);
    }
    if (!rows.empty() && !(row.energy_ev > rows.back().energy_ev)) {
      throw ValidationError(source + ": line " + std::to_string(line_no) +
                            ": photon energies must be strictly increasing");
    }
    if (row.eps_imag < 0.0) {
      throw ValidationError(source + ": line " + std::to_string(line_no) +
                            ": eps2 must be non-negative");
    }
    rows.push_back(row);
  }
  if (!have_header) throw ParseError("missing header 'energy_ev,eps2'", line_no + 1);
  return OpticalTable(std::move(rows), source);
}

OpticalTable load_optical_data(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open optical data file: " + path.string());
  return parse_optical_data(in, path.string());
}

MaterialRegistry MaterialRegistry::builtin() {
  MaterialRegistry reg;
  reg.add("ideal", DielectricModel::perfect_conductor());
  reg.add("Au", DielectricModel::drude(kDefaultGold));
  reg.add("Cu", DielectricModel::drude(kDefaultCopper));
  return reg;
}

MaterialRegistry MaterialRegistry::parse(std::istream& in,
                                         const std::filesystem::path& data_root) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("materials registry: ") + e.what());
  }
  if (!doc.is_object() || doc.size() != 1 || !doc.contains("materials") ||
      !doc["materials"].is_object()) {
    throw ConfigError("materials registry: expected a single 'materials' object");
  }

  auto number = [](const nlohmann::json& entry, const std::string& name,
                   const char* key) {
    if (!entry.contains(key) || !entry[key].is_number()) {
      throw ConfigError("material '" + name + "': missing numeric '" + key + "'");
    }
    return entry[key].get<double>();
  };

  MaterialRegistry reg;
  for (const auto& [name, entry] : doc["materials"].items()) {
    if (!entry.is_object() || !entry.contains("model") || !entry["model"].is_string()) {
      throw ConfigError("material '" + name + "': missing 'model'");
    }
    const auto model = entry["model"].get<std::string>();
    std::vector<std::string> allowed{"model"};
    if (model == "perfect") {
      reg.add(name, DielectricModel::perfect_conductor());
    } else if (model == "drude" || model == "tabulated") {
      const DrudeParams p{number(entry, name, "plasma_ev"),
                          number(entry, name, "relaxation_ev")};
      allowed.insert(allowed.end(), {"plasma_ev", "relaxation_ev"});
      try {
        p.validate();
      } catch (const DomainError& e) {
        throw ConfigError("material '" + name + "': " + e.what());
      }
      if (model == "drude") {
        reg.add(name, DielectricModel::drude(p));
      } else {
        allowed.insert(allowed.end(), {"data", "splice_ev"});
        if (!entry.contains("data") || !entry["data"].is_string()) {
          throw ConfigError("material '" + name + "': missing 'data' path");
        }
        std::filesystem::path data = entry["data"].get<std::string>();
        if (data.is_relative()) data = data_root / data;
        std::optional<double> splice;
        if (entry.contains("splice_ev")) splice = number(entry, name, "splice_ev");
        reg.add(name, DielectricModel::tabulated(load_optical_data(data), p, splice));
      }
    } else {
      throw ConfigError("material '" + name + "': unknown model '" + model + "'");
    }
    for (const auto& [key, _] : entry.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError("material '" + name + "': unknown key '" + key + "'");
      }
    }
  }
  return reg;
}

MaterialRegistry MaterialRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open materials registry: " + path.string());
  std::filesystem::path root = path.parent_path();
  if (const char* env = std::getenv("CASIMIR_DATA_DIR"); env != nullptr && *env) {
    root = env;
  }
  return parse(in, root);
}

const DielectricModel& MaterialRegistry::at(const std::string& name) const {
  const auto it = models_.find(name);
  if (it == models_.end()) {
    std::string known;
    for (const auto& n : names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("unknown material '" + name + "' (registry has: " + known + ")");
  }
  return it->second;
}

bool MaterialRegistry::contains(const std::string& name) const {
  return models_.count(name) != 0;
}

std::vector<std::string> MaterialRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(models_.size());
  for (const auto& [name, _] : models_) out.push_back(name);
  return out;
}

void MaterialRegistry::add(const std::string& name, DielectricModel model) {
  models_.insert_or_assign(name, std::move(model));
}

}  // namespace casimir::materials
