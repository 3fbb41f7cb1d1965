// Python bindings. Configurations cross the boundary as JSON text so that the
// Python side gets exactly the validation and error messages of the CLI.

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qsol/ensemble.hpp"
#include "qsol/figures.hpp"
#include "qsol/integrator.hpp"
#include "qsol/io.hpp"
#include "qsol/units.hpp"

namespace py = pybind11;
using namespace qsol;

namespace {

py::object to_py(const json& j) {
  switch (j.type()) {
    case json::value_t::null: return py::none();
    case json::value_t::boolean: return py::bool_(j.get<bool>());
    case json::value_t::number_integer: return py::int_(j.get<std::int64_t>());
    case json::value_t::number_unsigned: return py::int_(j.get<std::uint64_t>());
    case json::value_t::number_float: return py::float_(j.get<double>());
    case json::value_t::string: return py::str(j.get<std::string>());
    case json::value_t::array: {
      py::list l;
      for (const auto& v : j) l.append(to_py(v));
      return l;
    }
    default: {
      py::dict d;
      for (const auto& [k, v] : j.items()) d[py::str(k)] = to_py(v);
      return d;
    }
  }
}

template <class T, class A>
py::array_t<T> array(const std::vector<T, A>& v) {
  return py::array_t<T>(py::ssize_t(v.size()), v.data());
}

SimConfig parse_config(const std::string& text) {
  auto cfg = config_from_json(json::parse(text, nullptr, true, true));
  cfg.validate();
  return cfg;
}

py::dict report_to_py(const NoiseReport& r) {
  py::dict d;
  d["zeta"] = r.zeta;
  d["samples"] = r.samples;
  d["diverged"] = r.diverged;
  d["degenerate"] = r.degenerate;
  d["nu"] = array(r.nu);
  d["mean_spectrum"] = array(r.mean_spectrum);
  d["mean_stderr"] = array(r.mean_stderr);
  d["var_spectrum"] = array(r.var_spectrum);
  d["var_stderr"] = array(r.var_stderr);
  d["var_normalized"] = array(r.var_normalized);
  py::list f;
  for (const auto& s : r.filtered) f.append(to_py(to_json(s)));
  d["filtered"] = f;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Positive-P Monte Carlo simulator of quantum soliton noise";
  m.attr("__version__") = QSOL_VERSION;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  m.def("default_config", [] { return config_to_json(SimConfig{}).dump(); });
  m.def("normalize_config", [](const std::string& text) { return config_to_json(parse_config(text)).dump(); });
  m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); });

  m.def(
      "run_ensemble",
      [](const std::string& text) {
        const auto cfg = parse_config(text);
        EnsembleResult ens;
        std::vector<NoiseReport> reps;
        {
          py::gil_scoped_release release;
          ens = run_ensemble(cfg);
          reps = reports(ens);
        }
        py::dict out;
        out["trajectories"] = ens.trajectories;
        out["diverged"] = ens.diverged;
        out["xi"] = array(ens.xi_planes);
        out["wall_seconds"] = ens.wall_seconds;
        py::list planes;
        for (const auto& r : reps) planes.append(report_to_py(r));
        out["planes"] = planes;
        return out;
      },
      py::arg("config"));

  m.def(
      "propagate",
      [](const std::string& text, std::uint64_t trajectory) {
        const auto cfg = parse_config(text);
        const TimeGrid grid(cfg.grid.n_points, cfg.grid.tau_window);
        std::vector<double> zetas;
        for (double xi : cfg.xi_planes) zetas.push_back(xi_to_zeta(xi));
        TrajectoryRecord rec;
        {
          py::gil_scoped_release release;
          rec = propagate(initial_field(cfg, grid), cfg, cfg.stepper, zetas, trajectory);
        }
        std::vector<double> tau(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) tau[j] = grid.tau(j);
        py::list phi, phi_dag;
        std::vector<double> z;
        for (const auto& s : rec.snapshots) {
          phi.append(array(s.field.phi));
          phi_dag.append(array(s.field.phi_dag));
          z.push_back(s.zeta);
        }
        py::dict out;
        out["tau"] = array(tau);
        out["zeta"] = array(z);
        out["phi"] = phi;
        out["phi_dag"] = phi_dag;
        out["diverged"] = rec.diverged;
        return out;
      },
      py::arg("config"), py::arg("trajectory") = 0);

  m.def(
      "simulate",
      [](const std::string& text, const std::string& out, std::size_t dump) {
        const auto cfg = parse_config(text);
        SimulateOptions opt;
        opt.dump_trajectories = dump;
        py::gil_scoped_release release;
        return run_simulate(cfg, out, opt).summary.dump();
      },
      py::arg("config"), py::arg("out"), py::arg("dump") = 0);

  m.def(
      "sweep",
      [](const std::string& text, const std::string& out) {
        const auto spec = sweep_from_json(json::parse(text, nullptr, true, true));
        py::gil_scoped_release release;
        return run_sweep(spec, out).summary.dump();
      },
      py::arg("spec"), py::arg("out"));

  m.def(
      "figure",
      [](const std::string& id, const std::string& tier, const std::string& out,
         const std::string& overrides) {
        const auto o = json::parse(overrides);
        RunOverrides ov;
        if (o.contains("seed")) ov.seed = o["seed"].get<std::uint64_t>();
        if (o.contains("trajectories")) ov.trajectories = o["trajectories"].get<std::size_t>();
        if (o.contains("grid")) ov.grid_points = o["grid"].get<std::size_t>();
        if (o.contains("steps")) ov.steps = o["steps"].get<std::size_t>();
        if (o.contains("threads")) ov.threads = o["threads"].get<unsigned>();
        const auto t = parse_tier(tier);
        py::gil_scoped_release release;
        return run_figure(id, t, out, ov).summary.dump();
      },
      py::arg("id"), py::arg("tier"), py::arg("out"), py::arg("overrides") = "{}");

  m.def(
      "to_physical",
      [](const std::string& text, double value, const std::string& kind) {
        return to_physical(parse_config(text).units, value, parse_quantity_kind(kind));
      },
      py::arg("config"), py::arg("value"), py::arg("kind"));
  m.def(
      "from_physical",
      [](const std::string& text, double value, const std::string& kind) {
        return from_physical(parse_config(text).units, value, parse_quantity_kind(kind));
      },
      py::arg("config"), py::arg("value"), py::arg("kind"));

  m.def("read_array", [](const std::string& path) { return array(read_array(path)); });
}
