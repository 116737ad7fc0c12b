#include "doctest.h"

#include "casimir/constants.hpp"
#include "casimir/oscillator.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const fs::path kData = fs::path(CASIMIR_SOURCE_DIR) / "data";

struct Run {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("casimir_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run run(const std::string& args) {
  const auto out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = std::string("env -u CASIMIR_DATA_DIR \"") + CASIMIR_CLI_PATH + "\" " + args +
                          " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

fs::path write_config(const std::string& name, const json& j) {
  const auto p = scratch() / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

std::vector<std::vector<double>> parse_csv(const std::string& text, std::string* header = nullptr) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (header) *header = line;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("force on an ideal-metal grid matches the closed form") {
  const double r = 294.3e-6;
  const auto cfg = write_config("ideal.json", {{"sphere", "ideal"},
                                               {"plate", "ideal"},
                                               {"radius", r},
                                               {"z_grid", {0.2e-6, 0.5e-6, 1e-6}}});
  const auto res = run("force --config " + cfg.string() + " --tol 1e-8");
  REQUIRE(res.code == 0);
  std::string header;
  const auto rows = parse_csv(res.out, &header);
  CHECK(header == "z_m,force_n,est_rel_error");
  REQUIRE(rows.size() == 3);
  for (const auto& row : rows) {
    const double z = row[0];
    const double closed = -std::pow(casimir::pi, 3) * casimir::PhysicalConstants::hbar *
                          casimir::PhysicalConstants::c * r / (360 * z * z * z);
    CHECK(row[1] == doctest::Approx(closed).epsilon(1e-6));
    CHECK(row[2] <= 1e-8);
  }
  // Full-precision scientific notation.
  CHECK(res.out.find("1.99999999999999991e-07,") != std::string::npos);
}

TEST_CASE("pressure and gradient subcommands") {
  const auto cfg = write_config("grad.json", {{"sphere", "ideal"},
                                              {"plate", "ideal"},
                                              {"quantity", "gradient"},
                                              {"z_grid", {1e-6}}});
  const auto g = run("force --config " + cfg.string());
  REQUIRE(g.code == 0);
  const auto gr = parse_csv(g.out);
  const auto pcfg = write_config("p.json", {{"sphere", "ideal"}, {"plate", "ideal"}, {"z_grid", {1e-6}}});
  const auto p = run("pressure --config " + pcfg.string());
  REQUIRE(p.code == 0);
  const auto pr = parse_csv(p.out);
  CHECK(gr[0][1] == doctest::Approx(2 * casimir::pi * 294.3e-6 * std::abs(pr[0][1])).epsilon(1e-12));
}

TEST_CASE("roughness adds an averaged column") {
  const auto cfg = write_config(
      "rough.json", {{"sphere", "ideal"},
                     {"plate", "ideal"},
                     {"z_grid", {1e-6}},
                     {"roughness", {{"entries", {{-39.4e-9, 0.5}, {39.4e-9, 0.5}}}}}});
  const auto res = run("force --config " + cfg.string() + " --tol 1e-8");
  REQUIRE(res.code == 0);
  std::string header;
  const auto rows = parse_csv(res.out, &header);
  CHECK(header == "z_m,force_n,est_rel_error,force_n_rough");
  CHECK(rows[0][3] / rows[0][1] == doctest::Approx((std::pow(0.9606, -3) + std::pow(1.0394, -3)) / 2).epsilon(1e-7));
}

TEST_CASE("usage errors exit 2") {
  const auto empty = write_config("empty.json", {{"z_grid", json::array()}});
  const auto res = run("force --config " + empty.string());
  CHECK(res.code == 2);
  CHECK(res.err.find("empty grid") != std::string::npos);

  CHECK(run("force").code == 2);
  const auto unknown = write_config("unknown.json", {{"z_grid", {1e-6}}, {"radious", 1e-4}});
  const auto u = run("force --config " + unknown.string());
  CHECK(u.code == 2);
  CHECK(u.err.find("radious") != std::string::npos);

  const auto bad_mat = write_config("badmat.json", {{"z_grid", {1e-6}}, {"sphere", "unobtainium"}});
  const auto b = run("force --config " + bad_mat.string());
  CHECK(b.code == 2);
  CHECK(b.err.find("Au") != std::string::npos);

  CHECK(run("frobnicate").code == 2);
}

TEST_CASE("identical configs give byte-identical output") {
  const auto cfg = write_config("det.json", {{"z_grid", {{"start", 0.2e-6}, {"stop", 2e-6}, {"count", 5}, {"spacing", "log"}}}});
  const auto a = scratch() / "a.csv", b = scratch() / "b.csv";
  REQUIRE(run("force --config " + cfg.string() + " --threads 1 --out " + a.string()).code == 0);
  REQUIRE(run("force --config " + cfg.string() + " --threads 4 --out " + b.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(parse_csv(slurp(a)).size() == 5);
}

TEST_CASE("calibrate recovers the bundled truth") {
  const json truth = json::parse(slurp(kData / "calibration" / "truth.json"));
  const auto cfg = write_config("cal.json", {{"data", (kData / "calibration" / "synthetic.csv").string()},
                                             {"format", "json"}});
  const auto res = run("calibrate --config " + cfg.string());
  REQUIRE(res.code == 0);
  const json fit = json::parse(res.out);
  for (const char* k : {"k", "v0", "radius", "delta0"}) {
    CHECK(fit.at(k).get<double>() == doctest::Approx(truth.at(k).get<double>()).epsilon(1e-6));
  }
  const auto text = run("calibrate --config " + write_config("cal2.json", {{"data", (kData / "calibration" / "synthetic.csv").string()}}).string());
  REQUIRE(text.code == 0);
  CHECK(text.out.rfind("k = ", 0) == 0);
}

TEST_CASE("calibrate error exits") {
  const auto csv = scratch() / "single.csv";
  std::ofstream(csv) << "z_metal_m,v_applied_v,delta_c_f\n"
                        "3e-7,0.4,1e-14\n6e-7,0.4,5e-15\n1e-6,0.4,3e-15\n2e-6,0.4,1.5e-15\n";
  const auto single = run("calibrate --config " + write_config("single.json", {{"data", csv.string()}}).string());
  CHECK(single.code == 2);

  const std::string missing = (scratch() / "no_such_file.csv").string();
  const auto m = run("calibrate --config " + write_config("missing.json", {{"data", missing}}).string());
  CHECK(m.code == 1);
  CHECK(m.err.find(missing) != std::string::npos);

  const auto nocfg = run("force --config " + (scratch() / "absent.json").string());
  CHECK(nocfg.code == 1);
}

TEST_CASE("sweep writes raw and inverted data that round-trip") {
  const auto cfg = write_config("sweep.json", {{"sphere", "Au"},
                                               {"plate", "Cu"},
                                               {"delta0", 39.4e-9},
                                               {"freq_noise", 0.0},
                                               {"separation_noise", 0.0},
                                               {"z_grid", {0.2e-6, 0.6e-6, 1.2e-6}}});
  const auto out = scratch() / "sweep.csv";
  REQUIRE(run("sweep --config " + cfg.string() + " --seed 7 --out " + out.string()).code == 0);
  std::string header;
  const auto raw = parse_csv(slurp(out), &header);
  CHECK(header == "z_m,f_hz,sigma_hz");
  CHECK(raw.size() == 3);
  const auto inv = parse_csv(slurp(scratch() / "sweep.inverted.csv"), &header);
  CHECK(header == "z_m,gradient_n_per_m,sigma_gradient_n_per_m,z_actual_m,true_gradient_n_per_m");
  REQUIRE(inv.size() == 3);
  const auto p = casimir::oscillator::OscillatorParams::reference();
  for (std::size_t i = 0; i < inv.size(); ++i) {
    CHECK(std::abs(inv[i][1] / inv[i][4] - 1.0) <= 1e-12);
    // The raw frequency alone reproduces the gradient to the precision of f.
    const double g = casimir::oscillator::gradient_from_frequency(p, 2 * casimir::pi * raw[i][1]);
    CHECK(g == doctest::Approx(inv[i][4]).epsilon(1e-6));
  }

  const auto guard = write_config("guard.json", {{"z_grid", {0.01e-6, 1e-6}}});
  const auto g = run("sweep --config " + guard.string() + " --out " + out.string());
  CHECK(g.code == 2);
  CHECK(g.err.find("point 0") != std::string::npos);
}

TEST_CASE("limits scale with the bound") {
  const auto cfg = write_config("lim.json", {{"lambda_grid", {50e-9, 200e-9, 1e-6}},
                                             {"z_grid", {0.2e-6, 0.5e-6}},
                                             {"bound", 1e-12}});
  const auto a = run("limits --config " + cfg.string());
  REQUIRE(a.code == 0);
  const auto cfg2 = write_config("lim2.json", {{"lambda_grid", {50e-9, 200e-9, 1e-6}},
                                               {"z_grid", {0.2e-6, 0.5e-6}},
                                               {"bound", {2e-12, 2e-12}}});
  const auto b = run("limits --config " + cfg2.string());
  REQUIRE(b.code == 0);
  std::string header;
  const auto ra = parse_csv(a.out, &header), rb = parse_csv(b.out);
  CHECK(header == "lambda_m,alpha_limit");
  REQUIRE(ra.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(rb[i][1] == 2 * ra[i][1]);
  CHECK(ra[0][1] > ra[1][1]);
  const auto none = write_config("lim3.json", {{"lambda_grid", json::array()}, {"z_grid", {1e-6}}, {"bound", 1e-12}});
  CHECK(run("limits --config " + none.string()).code == 2);
}

TEST_CASE("materials validate") {
  const auto ok = run("materials validate " + (kData / "materials.json").string());
  CHECK(ok.code == 0);
  CHECK(ok.out.find("Au,") != std::string::npos);
  const auto bad = scratch() / "bad_registry.json";
  std::ofstream(bad) << R"({"materials": {"X": {"model": "drude", "plasma_ev": -1, "relaxation_ev": 0.1}}})";
  CHECK(run("materials validate " + bad.string()).code == 2);
  CHECK(run("materials validate " + (scratch() / "nope.json").string()).code == 1);
}
