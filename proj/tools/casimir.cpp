// casimir: force curves, calibration fits, synthetic sweeps and Yukawa limits.
//
// Every subcommand reads an optional JSON config (--config) whose keys are
// checked against a fixed list; --out, --seed, --tol and --threads override
// the config. Exit codes: 0 success, 1 I/O, 2 usage/domain/identifiability,
// 3 convergence.

#include "casimir/constants.hpp"
#include "casimir/electrostatics.hpp"
#include "casimir/errors.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/materials.hpp"
#include "casimir/oscillator.hpp"
#include "casimir/parallel.hpp"
#include "casimir/roughness.hpp"
#include "casimir/yukawa.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace casimir;

namespace {

enum ExitCode { kOk = 0, kIo = 1, kUsage = 2, kConvergence = 3 };

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<unsigned> threads;
};

// Parsed config plus the directory relative paths resolve against.
struct Config {
  json doc = json::object();
  fs::path base = fs::current_path();

  bool has(const char* key) const { return doc.contains(key); }

  template <class T>
  T get(const char* key, T fallback) const {
    if (!doc.contains(key)) return fallback;
    try {
      return doc.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
  }

  fs::path path(const std::string& p) const {
    const fs::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  }
};

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  std::string unknown;
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) unknown += (unknown.empty() ? "" : ", ") + key;
  }
  if (!unknown.empty()) throw ConfigError("unknown key(s) in " + where + ": " + unknown);
}

Config load_config(const Overrides& o, std::set<std::string> allowed) {
  Config c;
  if (o.config.empty()) return c;
  std::ifstream in(o.config);
  if (!in) throw IoError("cannot open config file '" + o.config + "'");
  try {
    c.doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config file '" + o.config + "' is not valid JSON: " + e.what());
  }
  c.base = fs::absolute(o.config).parent_path();
  allowed.insert({"out", "seed", "tol", "threads"});
  reject_unknown(c.doc, allowed, "config '" + o.config + "'");
  return c;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17e", v);
  return buf;
}

unsigned threads_of(const Config& c, const Overrides& o) {
  return resolve_threads(o.threads.value_or(c.get<unsigned>("threads", 0)));
}

double tol_of(const Config& c, const Overrides& o) {
  return o.tol.value_or(c.get<double>("tol", lifshitz::QuadratureOptions{}.tol));
}

lifshitz::QuadratureOptions quadrature_of(const Config& c, const Overrides& o) {
  lifshitz::QuadratureOptions q;
  q.tol = tol_of(c, o);
  return q;
}

// Writes to --out / "out" when given, else stdout.
void emit(const Config& c, const Overrides& o, const std::string& text) {
  std::string out = o.out.empty() ? c.get<std::string>("out", "") : o.out;
  if (out.empty()) {
    std::cout << text;
    return;
  }
  const fs::path p = o.out.empty() ? c.path(out) : fs::path(out);
  std::ofstream f(p, std::ios::binary);
  if (!f || !(f << text)) throw IoError("cannot write output file '" + p.string() + "'");
}

std::optional<fs::path> output_path(const Config& c, const Overrides& o) {
  if (!o.out.empty()) return fs::path(o.out);
  if (c.has("out")) return c.path(c.get<std::string>("out", ""));
  return std::nullopt;
}

// A grid is either an explicit array or {"start", "stop", "count", "spacing"}.
std::vector<double> grid_of(const Config& c, const char* key) {
  if (!c.has(key)) return {};
  const json& g = c.doc.at(key);
  std::vector<double> v;
  if (g.is_array()) {
    for (const auto& x : g) {
      if (!x.is_number()) throw ConfigError(std::string(key) + " entries must be numbers");
      v.push_back(x.get<double>());
    }
    return v;
  }
  reject_unknown(g, {"start", "stop", "count", "spacing"}, key);
  const double a = g.value("start", 0.0), b = g.value("stop", 0.0);
  const int n = g.value("count", 0);
  const std::string spacing = g.value("spacing", "linear");
  if (n < 0) throw ConfigError(std::string(key) + ".count must be non-negative");
  if (spacing != "linear" && spacing != "log") {
    throw ConfigError(std::string(key) + ".spacing must be 'linear' or 'log'");
  }
  if (spacing == "log" && (a <= 0 || b <= 0)) {
    throw ConfigError(std::string(key) + " needs positive bounds for log spacing");
  }
  for (int i = 0; i < n; ++i) {
    const double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
    v.push_back(spacing == "log" ? a * std::pow(b / a, t) : a + (b - a) * t);
  }
  return v;
}

std::vector<double> required_grid(const Config& c, const char* key) {
  auto g = grid_of(c, key);
  if (g.empty()) throw ConfigError(std::string("empty grid: '") + key + "' has no points");
  return g;
}

materials::MaterialRegistry registry_of(const Config& c) {
  if (c.has("materials")) return materials::MaterialRegistry::load(c.path(c.get<std::string>("materials", "")));
  if (const char* dir = std::getenv("CASIMIR_DATA_DIR")) {
    const fs::path p = fs::path(dir) / "materials.json";
    if (fs::exists(p)) return materials::MaterialRegistry::load(p);
  }
  return materials::MaterialRegistry::builtin();
}

// "roughness": {"entries": [[offset, weight], ...]}
//            | {"heightmaps": [path1, path2], "bins": N}
//            | {"heightmap": path, "bins": N}
std::optional<roughness::RoughnessDistribution> roughness_of(const Config& c) {
  if (!c.has("roughness")) return std::nullopt;
  const json& r = c.doc.at("roughness");
  reject_unknown(r, {"entries", "heightmaps", "heightmap", "bins"}, "roughness");
  const std::size_t bins = r.value("bins", roughness::kDefaultBins);
  const int kinds = r.contains("entries") + r.contains("heightmaps") + r.contains("heightmap");
  if (kinds != 1) {
    throw ConfigError("roughness needs exactly one of 'entries', 'heightmaps', 'heightmap'");
  }
  if (r.contains("entries")) {
    std::vector<roughness::Entry> e;
    for (const auto& row : r.at("entries")) {
      if (!row.is_array() || row.size() != 2) {
        throw ConfigError("roughness entries must be [offset_m, weight] pairs");
      }
      e.push_back({row[0].get<double>(), row[1].get<double>()});
    }
    return roughness::RoughnessDistribution(std::move(e));
  }
  if (r.contains("heightmap")) {
    return roughness::weights_from_heightmap(
        roughness::load_heightmap(c.path(r.at("heightmap").get<std::string>())), bins);
  }
  const json& maps = r.at("heightmaps");
  if (!maps.is_array() || maps.size() != 2) {
    throw ConfigError("roughness.heightmaps must list two files");
  }
  return roughness::weights_from_heightmaps(
      roughness::load_heightmap(c.path(maps[0].get<std::string>())),
      roughness::load_heightmap(c.path(maps[1].get<std::string>())), bins);
}

const std::set<std::string> kCurveKeys{"materials", "sphere", "plate", "z_grid",
                                       "roughness", "delta0"};

// force / pressure: z_m, value, est_rel_error[, value_rough]
int cmd_curve(const Overrides& o, bool sphere_plane) {
  auto keys = kCurveKeys;
  if (sphere_plane) keys.insert({"radius", "quantity"});
  const Config c = load_config(o, keys);
  const auto z = required_grid(c, "z_grid");
  const auto reg = registry_of(c);
  const auto& m1 = reg.at(c.get<std::string>("sphere", "Au"));
  const auto& m2 = reg.at(c.get<std::string>("plate", "Cu"));
  const double radius = c.get<double>("radius", 294.3e-6);
  const double delta0 = c.get<double>("delta0", 0.0);
  const std::string quantity = c.get<std::string>("quantity", "force");
  if (quantity != "force" && quantity != "gradient") {
    throw ConfigError("quantity must be 'force' or 'gradient'");
  }
  const auto rough = roughness_of(c);
  const auto q = quadrature_of(c, o);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zz = z[i] + 2 * delta0;
    if (!(zz > 0)) throw DomainError("grid point " + std::to_string(i) + ": separation must be positive");
    if (sphere_plane) lifshitz::SpherePlaneGeometry{radius, z[i], delta0}.validate();
  }

  std::vector<lifshitz::LifshitzResult> bare(z.size());
  std::vector<double> averaged(z.size(), 0.0);
  parallel_for(z.size(), threads_of(c, o), [&](std::size_t i) {
    const double zz = z[i] + 2 * delta0;
    if (!sphere_plane) {
      bare[i] = lifshitz::pressure_plane_plane(zz, m1, m2, q);
      if (rough) averaged[i] = roughness::averaged_pressure(zz, *rough, m1, m2, q);
    } else if (quantity == "force") {
      bare[i] = lifshitz::force_sphere_plane(zz, radius, m1, m2, q);
      if (rough) averaged[i] = roughness::averaged_force(zz, radius, *rough, m1, m2, q);
    } else {
      bare[i] = lifshitz::force_gradient_sphere_plane(zz, radius, m1, m2, q);
      if (rough) {
        averaged[i] = 2 * pi * radius * std::abs(roughness::averaged_pressure(zz, *rough, m1, m2, q));
      }
    }
  });

  const std::string col = !sphere_plane ? "pressure_pa" : quantity == "force" ? "force_n" : "gradient_n_per_m";
  std::string text = "z_m," + col + ",est_rel_error" + (rough ? "," + col + "_rough" : "") + "\n";
  for (std::size_t i = 0; i < z.size(); ++i) {
    text += num(z[i]) + "," + num(bare[i].value) + "," + num(bare[i].est_rel_error);
    if (rough) text += "," + num(averaged[i]);
    text += "\n";
  }
  emit(c, o, text);
  return kOk;
}

electrostatics::CalibrationParams params_of(const json& j, const std::string& where) {
  reject_unknown(j, {"k", "v0", "radius", "delta0"}, where);
  for (const char* k : {"k", "v0", "radius", "delta0"}) {
    if (!j.contains(k)) throw ConfigError(where + " is missing '" + k + "'");
  }
  return {j.at("k").get<double>(), j.at("v0").get<double>(), j.at("radius").get<double>(),
          j.at("delta0").get<double>()};
}

// calibrate: text key-value report, or JSON with "format": "json".
int cmd_calibrate(const Overrides& o) {
  const Config c = load_config(o, {"data", "nominal_radius", "guess", "format", "max_evaluations"});
  if (!c.has("data")) throw ConfigError("calibrate needs 'data' (CSV of z_metal_m,v_applied_v,delta_c_f)");
  const auto samples = electrostatics::load_calibration_csv(c.path(c.get<std::string>("data", "")));
  const auto guess = c.has("guess") ? params_of(c.doc.at("guess"), "guess")
                                    : electrostatics::initial_guess(samples, c.get<double>("nominal_radius", 294.3e-6));
  electrostatics::FitOptions fo;
  fo.max_evaluations = c.get<std::size_t>("max_evaluations", fo.max_evaluations);
  const auto fit = electrostatics::calibrate(samples, guess, fo);
  const auto sigma = fit.sigma();
  const std::string format = c.get<std::string>("format", "text");
  const char* names[4] = {"k", "v0", "radius", "delta0"};
  const double values[4] = {fit.k, fit.v0, fit.radius, fit.delta0};
  std::string text;
  if (format == "json") {
    json j;
    for (int i = 0; i < 4; ++i) {
      j[names[i]] = values[i];
      j[std::string("sigma_") + names[i]] = sigma[i];
    }
    j["covariance"] = fit.covariance;
    j["residual_rms"] = fit.residual_rms;
    j["iterations"] = fit.iterations;
    j["samples"] = samples.size();
    text = j.dump(2) + "\n";
  } else if (format == "text") {
    for (int i = 0; i < 4; ++i) {
      text += std::string(names[i]) + " = " + num(values[i]) + "\n";
      text += std::string("sigma_") + names[i] + " = " + num(sigma[i]) + "\n";
    }
    text += "residual_rms = " + num(fit.residual_rms) + "\n";
    text += "iterations = " + std::to_string(fit.iterations) + "\n";
    text += "samples = " + std::to_string(samples.size()) + "\n";
  } else {
    throw ConfigError("format must be 'text' or 'json'");
  }
  emit(c, o, text);
  return kOk;
}

oscillator::OscillatorParams oscillator_of(const Config& c) {
  auto p = oscillator::OscillatorParams::reference();
  if (!c.has("oscillator")) return p;
  const json& j = c.doc.at("oscillator");
  reject_unknown(j, {"f0_hz", "coupling"}, "oscillator");
  if (j.contains("f0_hz")) p.omega0 = 2 * pi * j.at("f0_hz").get<double>();
  if (j.contains("coupling")) p.coupling = j.at("coupling").get<double>();
  // Derived reference quantities no longer apply to a custom oscillator.
  if (j.contains("f0_hz") || j.contains("coupling")) p.kappa = p.inertia = p.lever = std::nullopt;
  p.validate();
  return p;
}

// sweep: raw CSV (z_m,f_hz,sigma_hz) at out, inverted gradients at
// inverted_out (default: out with ".inverted" before the extension).
int cmd_sweep(const Overrides& o) {
  auto keys = kCurveKeys;
  keys.insert({"radius", "oscillator", "integration_time", "freq_noise", "separation_noise",
               "amplitude", "inverted_out"});
  const Config c = load_config(o, keys);
  oscillator::SweepConfig cfg;
  cfg.z_grid = required_grid(c, "z_grid");
  cfg.integration_time = c.get<double>("integration_time", cfg.integration_time);
  cfg.noise.freq_noise = c.get<double>("freq_noise", cfg.noise.freq_noise);
  cfg.noise.separation_noise = c.get<double>("separation_noise", cfg.noise.separation_noise);
  if (c.has("amplitude")) {
    const auto a = grid_of(c, "amplitude");
    if (a.size() != cfg.z_grid.size()) throw ConfigError("amplitude must have one entry per z_grid point");
    const auto z = cfg.z_grid;
    cfg.amplitude = [a, z](double zm) {
      for (std::size_t i = 0; i < z.size(); ++i) {
        if (z[i] == zm) return a[i];
      }
      return oscillator::default_amplitude(zm);
    };
  }
  cfg.validate();

  const auto reg = registry_of(c);
  oscillator::SweepModel model{oscillator_of(c),
                               {c.get<double>("radius", 294.3e-6), 1.0, c.get<double>("delta0", 0.0)},
                               reg.at(c.get<std::string>("sphere", "Au")),
                               reg.at(c.get<std::string>("plate", "Cu")),
                               roughness_of(c).value_or(roughness::RoughnessDistribution::flat()),
                               quadrature_of(c, o)};
  model.geometry.validate();

  const auto out = output_path(c, o);
  if (!out) throw ConfigError("sweep needs an output path (--out or 'out')");
  fs::path inv_path = out->parent_path() / (out->stem().string() + ".inverted" + out->extension().string());
  if (c.has("inverted_out")) inv_path = c.path(c.get<std::string>("inverted_out", ""));

  const std::uint64_t seed = o.seed.value_or(c.get<std::uint64_t>("seed", 0));
  const auto pts = oscillator::simulate_sweep(cfg, model, seed, threads_of(c, o));
  const auto inv = oscillator::invert_sweep(model.params, pts);

  std::ostringstream raw;
  oscillator::write_sweep_csv(raw, pts);
  std::string inverted = "z_m,gradient_n_per_m,sigma_gradient_n_per_m,z_actual_m,true_gradient_n_per_m\n";
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double sg = pts[i].sigma_omega / (model.params.omega0 * model.params.shift_per_gradient());
    inverted += num(pts[i].z_metal) + "," + num(inv[i]) + "," + num(sg) + "," + num(pts[i].z_actual) +
                "," + num(pts[i].gradient) + "\n";
  }
  for (const auto& [p, text] : {std::pair{*out, raw.str()}, std::pair{inv_path, inverted}}) {
    std::ofstream f(p, std::ios::binary);
    if (!f || !(f << text)) throw IoError("cannot write output file '" + p.string() + "'");
  }
  return kOk;
}

yukawa::LayeredBody body_of(const Config& c, const char* key, yukawa::LayeredBody fallback) {
  if (!c.has(key)) return fallback;
  const json& j = c.doc.at(key);
  reject_unknown(j, {"radius", "layers", "core_density"}, key);
  yukawa::LayeredBody b = fallback;
  if (j.contains("layers")) {
    b.layers.clear();
    for (const auto& l : j.at("layers")) {
      reject_unknown(l, {"thickness", "density"}, std::string(key) + ".layers[]");
      b.layers.push_back({l.at("thickness").get<double>(), l.at("density").get<double>()});
    }
  }
  if (j.contains("core_density")) b.core_density = j.at("core_density").get<double>();
  if (j.contains("radius")) {
    if (!b.is_sphere()) throw ConfigError(std::string(key) + " is a half-space and has no radius");
    b.shape = yukawa::Sphere{j.at("radius").get<double>()};
  }
  b.validate();
  return b;
}

// limits: "bound" is a constant force bound in N or one value per z_grid point.
int cmd_limits(const Overrides& o) {
  const Config c = load_config(o, {"lambda_grid", "z_grid", "bound", "sphere", "plate"});
  const auto lambdas = required_grid(c, "lambda_grid");
  const auto z = required_grid(c, "z_grid");
  if (!c.has("bound")) throw ConfigError("limits needs 'bound' (N, scalar or one per z_grid point)");
  std::vector<double> bound;
  if (c.doc.at("bound").is_number()) {
    bound.assign(z.size(), c.doc.at("bound").get<double>());
  } else {
    bound = grid_of(c, "bound");
    if (bound.size() != z.size()) throw ConfigError("bound must have one entry per z_grid point");
  }
  auto bound_at = [&](double zz) {
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (z[i] == zz) return bound[i];
    }
    throw DomainError("no bound for z = " + num(zz));
  };
  const auto sphere = body_of(c, "sphere", yukawa::default_sphere());
  const auto plate = body_of(c, "plate", yukawa::default_plate());
  std::vector<yukawa::LimitRow> rows(lambdas.size());
  parallel_for(lambdas.size(), threads_of(c, o), [&](std::size_t i) {
    rows[i] = {lambdas[i], yukawa::alpha_limit(bound_at, lambdas[i], sphere, plate, z)};
  });
  std::ostringstream text;
  yukawa::write_limits_csv(text, rows);
  emit(c, o, text.str());
  return kOk;
}

// materials validate: eps(i xi) >= 1, finite and non-increasing on a log grid.
int cmd_materials_validate(const Overrides& o, const std::string& registry_path) {
  Config c;
  if (!registry_path.empty()) c.doc["materials"] = registry_path;
  const auto reg = registry_of(c);
  std::string text = "name,model,status\n";
  bool ok = true;
  for (const auto& name : reg.names()) {
    const auto& m = reg.at(name);
    std::string status = "ok";
    if (!m.is_perfect_conductor()) {
      double prev = INFINITY;
      for (int i = 0; i <= 40; ++i) {
        const double xi = 1e-4 * std::pow(1e6, i / 40.0);
        const double e = m(xi);
        if (!std::isfinite(e) || e < 1.0 || e > prev) {
          status = "bad eps at xi = " + num(xi) + " eV";
          ok = false;
          break;
        }
        prev = e;
      }
    }
    text += name + "," + m.describe() + "," + status + "\n";
  }
  Config out;
  emit(out, o, text);
  if (!ok) throw ValidationError("materials registry has invalid dielectric responses");
  return kOk;
}

int run(int argc, char** argv) {
  CLI::App app{"Casimir force, calibration and Yukawa-limit toolkit"};
  app.require_subcommand(1);
  Overrides o;
  auto common = [&o](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file");
    sub->add_option("--out", o.out, "output path (default stdout)");
    sub->add_option("--seed", o.seed, "random seed");
    sub->add_option("--tol", o.tol, "quadrature relative tolerance");
    sub->add_option("--threads", o.threads, "worker threads (0 = all cores)");
  };
  auto* force = app.add_subcommand("force", "sphere-plane force or gradient over a grid");
  auto* pressure = app.add_subcommand("pressure", "plane-plane pressure over a grid");
  auto* calibrate = app.add_subcommand("calibrate", "electrostatic calibration fit");
  auto* sweep = app.add_subcommand("sweep", "synthetic oscillator sweep and its inversion");
  auto* limits = app.add_subcommand("limits", "Yukawa alpha(lambda) limits");
  auto* mat = app.add_subcommand("materials", "materials registry tools");
  auto* validate = mat->add_subcommand("validate", "check every registry entry");
  mat->require_subcommand(1);
  std::string registry_path;
  validate->add_option("registry", registry_path, "registry JSON (default: builtin or $CASIMIR_DATA_DIR)");
  for (auto* s : {force, pressure, calibrate, sweep, limits}) common(s);
  validate->add_option("--out", o.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }
  if (*force) return cmd_curve(o, true);
  if (*pressure) return cmd_curve(o, false);
  if (*calibrate) return cmd_calibrate(o);
  if (*sweep) return cmd_sweep(o);
  if (*limits) return cmd_limits(o);
  return cmd_materials_validate(o, registry_path);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const IoError& e) {
    std::cerr << "casimir: I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ConvergenceError& e) {
    std::cerr << "casimir: convergence error: " << e.what() << " (partial value "
              << num(e.partial_value()) << ", estimated relative error " << num(e.est_rel_error())
              << ")\n";
    return kConvergence;
  } catch (const FitError& e) {
    std::cerr << "casimir: fit did not converge: " << e.what() << "\n";
    return kConvergence;
  } catch (const IdentifiabilityError& e) {
    std::cerr << "casimir: identifiability error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "casimir: error: " << e.what() << "\n";
    return kUsage;
  }
}
