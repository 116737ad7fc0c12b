// Python bindings for the core computations.

#include "casimir/electrostatics.hpp"
#include "casimir/errors.hpp"
#include "casimir/lifshitz.hpp"
#include "casimir/materials.hpp"
#include "casimir/oscillator.hpp"
#include "casimir/roughness.hpp"
#include "casimir/yukawa.hpp"

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace casimir;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Casimir force, electrostatic calibration and Yukawa-limit core";

  py::register_exception<Error>(m, "CasimirError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_ArithmeticError);
  py::register_exception<IdentifiabilityError>(m, "IdentifiabilityError", PyExc_ValueError);

  using materials::DielectricModel;
  py::class_<materials::DrudeParams>(m, "DrudeParams")
      .def(py::init<double, double>(), py::arg("plasma_ev"), py::arg("relaxation_ev"))
      .def_readwrite("plasma_ev", &materials::DrudeParams::plasma_energy)
      .def_readwrite("relaxation_ev", &materials::DrudeParams::relaxation_energy);
  py::class_<DielectricModel>(m, "DielectricModel")
      .def_static("perfect_conductor", &DielectricModel::perfect_conductor)
      .def_static("drude", &DielectricModel::drude, py::arg("params"))
      .def_static("gold", [] { return DielectricModel::drude(materials::kDefaultGold); })
      .def_static("copper", [] { return DielectricModel::drude(materials::kDefaultCopper); })
      .def("__call__", &DielectricModel::operator(), py::arg("xi_ev"))
      .def("__repr__", &DielectricModel::describe);

  py::class_<lifshitz::QuadratureOptions>(m, "QuadratureOptions")
      .def(py::init([](double tol) {
             lifshitz::QuadratureOptions o;
             o.tol = tol;
             return o;
           }),
           py::arg("tol") = 1e-6)
      .def_readwrite("tol", &lifshitz::QuadratureOptions::tol)
      .def_readwrite("xi_min_ev", &lifshitz::QuadratureOptions::xi_min_ev);
  py::class_<lifshitz::LifshitzResult>(m, "LifshitzResult")
      .def_readonly("value", &lifshitz::LifshitzResult::value)
      .def_readonly("est_rel_error", &lifshitz::LifshitzResult::est_rel_error)
      .def_readonly("evaluations", &lifshitz::LifshitzResult::evaluations);
  const auto q = lifshitz::QuadratureOptions{};
  m.def("pressure_plane_plane", &lifshitz::pressure_plane_plane, py::arg("z"), py::arg("m1"),
        py::arg("m2"), py::arg("opts") = q);
  m.def("force_sphere_plane", &lifshitz::force_sphere_plane, py::arg("z"), py::arg("radius"),
        py::arg("m1"), py::arg("m2"), py::arg("opts") = q);
  m.def("force_gradient_sphere_plane", &lifshitz::force_gradient_sphere_plane, py::arg("z"),
        py::arg("radius"), py::arg("m1"), py::arg("m2"), py::arg("opts") = q);
  m.def("ideal_force_sphere_plane", &lifshitz::ideal_force_sphere_plane, py::arg("z"),
        py::arg("radius"));
  m.def("ideal_pressure_plane_plane", &lifshitz::ideal_pressure_plane_plane, py::arg("z"));

  py::class_<roughness::RoughnessDistribution>(m, "RoughnessDistribution")
      .def(py::init([](const std::vector<std::pair<double, double>>& rows) {
             std::vector<roughness::Entry> e;
             for (const auto& [offset, weight] : rows) e.push_back({offset, weight});
             return roughness::RoughnessDistribution(std::move(e));
           }),
           py::arg("entries"))
      .def_static("flat", &roughness::RoughnessDistribution::flat)
      .def("__len__", &roughness::RoughnessDistribution::size)
      .def("entries", [](const roughness::RoughnessDistribution& d) {
        std::vector<std::pair<double, double>> out;
        for (const auto& e : d.entries()) out.emplace_back(e.offset, e.weight);
        return out;
      });
  m.def("averaged_force", &roughness::averaged_force, py::arg("z"), py::arg("radius"),
        py::arg("dist"), py::arg("m1"), py::arg("m2"), py::arg("opts") = q);
  m.def("averaged_pressure", &roughness::averaged_pressure, py::arg("z"), py::arg("dist"),
        py::arg("m1"), py::arg("m2"), py::arg("opts") = q);

  m.def("series_sum", &electrostatics::series_sum, py::arg("gap_over_radius"),
        py::arg("series_tol") = 1e-13);
  m.def("small_gap_expansion", &electrostatics::small_gap_expansion, py::arg("gap_over_radius"),
        py::arg("order"));
  m.def("electrostatic_force",
        py::overload_cast<double, double, double, double, double>(&electrostatics::electrostatic_force),
        py::arg("z_metal"), py::arg("voltage_difference"), py::arg("radius"), py::arg("delta0"),
        py::arg("series_tol") = 1e-13);
  using electrostatics::CalibrationParams;
  py::class_<CalibrationParams>(m, "CalibrationParams")
      .def(py::init<double, double, double, double>(), py::arg("k"), py::arg("v0"),
           py::arg("radius"), py::arg("delta0"))
      .def_readwrite("k", &CalibrationParams::k)
      .def_readwrite("v0", &CalibrationParams::v0)
      .def_readwrite("radius", &CalibrationParams::radius)
      .def_readwrite("delta0", &CalibrationParams::delta0);
  py::class_<electrostatics::CalibrationFit>(m, "CalibrationFit")
      .def_readonly("k", &electrostatics::CalibrationFit::k)
      .def_readonly("v0", &electrostatics::CalibrationFit::v0)
      .def_readonly("radius", &electrostatics::CalibrationFit::radius)
      .def_readonly("delta0", &electrostatics::CalibrationFit::delta0)
      .def_readonly("covariance", &electrostatics::CalibrationFit::covariance)
      .def_readonly("residual_rms", &electrostatics::CalibrationFit::residual_rms)
      .def("sigma", &electrostatics::CalibrationFit::sigma);
  // Samples cross the boundary as (z_metal, v_applied, delta_c) tuples.
  using SampleTuple = std::tuple<double, double, double>;
  auto to_samples = [](const std::vector<SampleTuple>& rows) {
    std::vector<electrostatics::CalibrationSample> s;
    for (const auto& [z, v, c] : rows) s.push_back({z, v, c});
    return s;
  };
  m.def("synthesize_samples",
        [](const CalibrationParams& truth, const std::vector<double>& z, const std::vector<double>& v) {
          std::vector<SampleTuple> out;
          for (const auto& s : electrostatics::synthesize_samples(truth, z, v)) {
            out.emplace_back(s.z_metal, s.v_applied, s.delta_c);
          }
          return out;
        },
        py::arg("truth"), py::arg("z_grid"), py::arg("voltages"));
  m.def("initial_guess",
        [to_samples](const std::vector<SampleTuple>& rows, double nominal_radius) {
          return electrostatics::initial_guess(to_samples(rows), nominal_radius);
        },
        py::arg("samples"), py::arg("nominal_radius"));
  m.def("calibrate",
        [to_samples](const std::vector<SampleTuple>& rows, const CalibrationParams& guess) {
          return electrostatics::calibrate(to_samples(rows), guess);
        },
        py::arg("samples"), py::arg("guess"));

  using oscillator::OscillatorParams;
  py::class_<OscillatorParams>(m, "OscillatorParams")
      .def_static("reference", &OscillatorParams::reference)
      .def_readwrite("omega0", &OscillatorParams::omega0)
      .def_readwrite("coupling", &OscillatorParams::coupling)
      .def("shift_per_gradient", &OscillatorParams::shift_per_gradient);
  m.def("resonant_frequency", &oscillator::resonant_frequency, py::arg("params"), py::arg("gradient"));
  m.def("gradient_from_frequency", &oscillator::gradient_from_frequency, py::arg("params"),
        py::arg("omega_r"));
  m.def("min_detectable_gradient", &oscillator::min_detectable_gradient, py::arg("params"),
        py::arg("delta_f_min_hz"));
  m.def("spring_constant",
        [](double w, double t, double l, double e) {
          return oscillator::spring_constant({w, t, l, e});
        },
        py::arg("width"), py::arg("thickness"), py::arg("length"), py::arg("youngs"));

  m.def("yukawa_force_default",
        [](double alpha, double lambda, double z, double radius) {
          return yukawa::yukawa_force_sphere_plane({alpha, lambda}, yukawa::default_sphere(radius),
                                                   yukawa::default_plate(), z);
        },
        py::arg("alpha"), py::arg("lambda_"), py::arg("z"), py::arg("radius") = 294.3e-6);
  m.def("alpha_limit_default",
        [](const yukawa::ResidualBound& bound, double lambda, const std::vector<double>& z,
           double radius) {
          return yukawa::alpha_limit(bound, lambda, yukawa::default_sphere(radius),
                                     yukawa::default_plate(), z);
        },
        py::arg("bound"), py::arg("lambda_"), py::arg("z_grid"), py::arg("radius") = 294.3e-6);
}
