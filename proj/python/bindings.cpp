#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fdspde/cli.hpp"
#include "fdspde/convergence.hpp"
#include "fdspde/errors.hpp"
#include "fdspde/lemma.hpp"
#include "fdspde/noise.hpp"
#include "fdspde/ou.hpp"
#include "fdspde/report_json.hpp"
#include "fdspde/scheme.hpp"
#include "fdspde/spectral.hpp"

namespace py = pybind11;
using namespace fdspde;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

std::vector<double> from_array(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  return {a.data(), a.data() + a.size()};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "finite-difference stochastic heat equation solver";

  auto base = py::register_exception<Error>(m, "FdspdeError", PyExc_RuntimeError);
  // derived types last: the newest translator is tried first
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto grid_error = py::register_exception<GridError>(m, "GridError", base.ptr());
  py::register_exception<CflViolation>(m, "CflViolation", grid_error.ptr());
  py::register_exception<NestingError>(m, "NestingError", grid_error.ptr());
  py::register_exception<NoiseExhausted>(m, "NoiseExhausted", base.ptr());

  py::class_<GridConfig>(m, "Grid")
      .def(py::init(&GridConfig::make), py::arg("n"), py::arg("c") = 0.25)
      .def_property_readonly("n", &GridConfig::n)
      .def_property_readonly("c", &GridConfig::c)
      .def_property_readonly("h", &GridConfig::h)
      .def_property_readonly("num_space", &GridConfig::num_space)
      .def("point", &GridConfig::point)
      .def("time", &GridConfig::time)
      .def("step_of", &GridConfig::step_of)
      .def("kappa", &GridConfig::kappa)
      .def("rho", &GridConfig::rho)
      .def("__repr__", [](const GridConfig& g) {
        std::ostringstream os;
        os << "Grid(n=" << g.n() << ", c=" << g.c() << ", h=" << g.h() << ")";
        return os.str();
      });

  m.def("lambda_disc", &lambda_disc, py::arg("n"), py::arg("j"));
  m.def("heat_kernel", [](double t, double x) { return heat_kernel_cont(t, x); }, py::arg("t"), py::arg("x"));
  m.def("discrete_heat_kernel",
        [](const GridConfig& g, double t, double x, double y) { return discrete_heat_kernel(SpectralTable(g), t, x, y); },
        py::arg("grid"), py::arg("t"), py::arg("x"), py::arg("y"));
  m.def("apply_semigroup",
        [](const GridConfig& g, py::array_t<double, py::array::c_style | py::array::forcecast> f, double t) {
          return to_array(apply_semigroup_disc(SpectralTable(g), from_array(f), t));
        },
        py::arg("grid"), py::arg("f"), py::arg("t"));
  m.def("random_walk_semigroup",
        [](const GridConfig& g, py::array_t<double, py::array::c_style | py::array::forcecast> f, double t) {
          return to_array(random_walk_semigroup(g, from_array(f), t));
        },
        py::arg("grid"), py::arg("f"), py::arg("t"));
  m.def("kernel_distance_sq", [](const GridConfig& g, double t) { return kernel_l2_distance_sq(SpectralTable(g), t); },
        py::arg("grid"), py::arg("t"));

  m.def("q_cont", &q_cont, py::arg("t"));
  m.def("q_disc", &q_disc, py::arg("grid"), py::arg("t"));
  m.def("ou_coupling_error_sq", &ou_coupling_error_sq, py::arg("grid"), py::arg("t"));

  m.def("noise_cells",
        [](const GridConfig& g, double horizon, std::uint64_t seed, std::uint64_t sample_index) {
          const auto f = NoiseField::sample(g, horizon, {seed, sample_index});
          py::array_t<double> out({static_cast<py::ssize_t>(f.steps()), static_cast<py::ssize_t>(g.num_space())});
          std::copy(f.cells().begin(), f.cells().end(), out.mutable_data());
          return out;
        },
        py::arg("grid"), py::arg("horizon"), py::arg("seed") = 0, py::arg("sample_index") = 0);

  m.def("simulate",
        [](const GridConfig& g, const std::string& drift, const std::string& initial, double horizon,
           std::uint64_t seed, std::uint64_t sample_index) {
          const auto field = NoiseField::sample(g, horizon, {seed, sample_index});
          const auto steps = static_cast<std::size_t>(g.step_of(horizon));
          const auto traj = trajectory(g, find_drift(drift), find_initial_condition(initial).sample(g), field, steps);
          py::array_t<double> out({static_cast<py::ssize_t>(traj.size()), static_cast<py::ssize_t>(g.num_space())});
          double* p = out.mutable_data();
          for (const auto& row : traj) p = std::copy(row.begin(), row.end(), p);
          return out;
        },
        py::arg("grid"), py::arg("drift") = "sign", py::arg("initial") = "sine", py::arg("horizon") = 0.25,
        py::arg("seed") = 0, py::arg("sample_index") = 0);

  m.def("_estimate_rates", [](const std::string& plan_json) {
    const auto plan = plan_from_json(nlohmann::json::parse(plan_json));
    RateReport report;
    {
      py::gil_scoped_release release;
      report = estimate_rates(plan);
    }
    return to_json(report).dump();
  });
  m.def("_default_plan", [] { return to_json(ExperimentPlan{}).dump(); });
  m.def("_deterministic_rate", [](const std::string& initial, const std::vector<std::int64_t>& levels, double t,
                                  double c) { return to_json(deterministic_rate_experiment(initial, levels, t, c)).dump(); });
  m.def("_verify", [](const std::string& cfg_json) {
    return to_json(run_all(verifier_config_from_json(nlohmann::json::parse(cfg_json)))).dump();
  });
  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"));
  m.attr("build_id") = build_id();
}
