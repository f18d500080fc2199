#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "thinfilm/corpus.hpp"
#include "thinfilm/fdm_oracle.hpp"
#include "thinfilm/functionals.hpp"
#include "thinfilm/inequalities.hpp"
#include "thinfilm/initial_condition.hpp"
#include "thinfilm/io.hpp"
#include "thinfilm/jko.hpp"
#include "thinfilm/rates.hpp"
#include "thinfilm/transport.hpp"

namespace py = pybind11;
using namespace thinfilm;

namespace {

py::array_t<double> to_array(std::span<const double> v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

std::vector<double> to_vector(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 1) throw std::invalid_argument("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

py::object to_python(const io::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

std::vector<Atom> to_atoms(const std::vector<std::pair<double, double>>& pairs) {
  std::vector<Atom> atoms;
  for (const auto& [x, m] : pairs) atoms.push_back({x, m});
  return atoms;
}

py::dict snapshot_dict(const Snapshot& s) {
  py::dict d;
  d["time"] = s.time;
  d["positions"] = to_array(s.state.positions());
  d["record"] = to_python(io::to_json(s.record));
  d["el_residual"] = s.diagnostics.el_residual;
  d["w2_sq_moved"] = s.diagnostics.w2_sq_moved;
  d["inner_iters"] = s.diagnostics.inner_iters;
  return d;
}

}  // namespace

PYBIND11_MODULE(_thinfilm, m) {
  m.doc() = "Minimising-movement scheme for the rescaled thin-film equation";

  py::class_<GridDensity>(m, "GridDensity")
      .def(py::init([](double x_min, double dx, const py::array_t<double>& values) {
             return GridDensity(x_min, dx, to_vector(values));
           }),
           py::arg("x_min"), py::arg("dx"), py::arg("values"))
      .def_property_readonly("x_min", &GridDensity::x_min)
      .def_property_readonly("dx", &GridDensity::dx)
      .def_property_readonly("mass", &GridDensity::mass)
      .def_property_readonly("values", [](const GridDensity& g) { return to_array(g.values()); })
      .def("__len__", &GridDensity::size);

  py::class_<QuantileDensity>(m, "QuantileDensity")
      .def(py::init([](double mass, const py::array_t<double>& positions) {
             return QuantileDensity(mass, to_vector(positions));
           }),
           py::arg("mass"), py::arg("positions"))
      .def_property_readonly("mass", &QuantileDensity::mass)
      .def_property_readonly("positions",
                             [](const QuantileDensity& q) { return to_array(q.positions()); })
      .def("translated", &QuantileDensity::translated, py::arg("d"))
      .def("to_grid",
           [](const QuantileDensity& q, double x_min, double dx, std::size_t count) {
             return quantile_to_grid(q, x_min, dx, count).density;
           },
           py::arg("x_min"), py::arg("dx"), py::arg("count"))
      .def_static("from_grid", &grid_to_quantile, py::arg("grid"), py::arg("n"))
      .def("__len__", &QuantileDensity::size);

  py::class_<SmythHill>(m, "SmythHill")
      .def(py::init<double>(), py::arg("mass"))
      .def_property_readonly("mass", &SmythHill::mass)
      .def_property_readonly("support_radius", &SmythHill::support_radius)
      .def("value", &SmythHill::value, py::arg("x"))
      .def("quantiles", &SmythHill::quantiles, py::arg("n"))
      .def("sample", &SmythHill::sample, py::arg("x_min"), py::arg("dx"), py::arg("count"))
      .def("alpha", &SmythHill::alpha)
      .def("beta", &SmythHill::beta)
      .def("energy", &SmythHill::energy)
      .def("entropy", &SmythHill::entropy)
      .def("fourth_moment", &SmythHill::fourth_moment)
      .def("extra_dissipation", &SmythHill::extra_dissipation);

  m.def("alpha", py::overload_cast<const QuantileDensity&>(&alpha), py::arg("q"));
  m.def("alpha", py::overload_cast<const GridDensity&>(&alpha), py::arg("g"));
  m.def("beta", py::overload_cast<const QuantileDensity&>(&beta), py::arg("q"));
  m.def("beta", py::overload_cast<const GridDensity&>(&beta), py::arg("g"));
  m.def("energy", py::overload_cast<const QuantileDensity&>(&energy), py::arg("q"));
  m.def("energy", py::overload_cast<const GridDensity&>(&energy), py::arg("g"));
  m.def("entropy", py::overload_cast<const QuantileDensity&>(&entropy), py::arg("q"));
  m.def("entropy", py::overload_cast<const GridDensity&>(&entropy), py::arg("g"));
  m.def("moment", py::overload_cast<const QuantileDensity&, int>(&moment), py::arg("q"),
        py::arg("order"));
  m.def("moment", py::overload_cast<const GridDensity&, int>(&moment), py::arg("g"),
        py::arg("order"));
  m.def(
      "dissipation",
      [](const QuantileDensity& q) {
        const auto d = dissipation(q);
        return py::make_tuple(d.D, d.extra);
      },
      py::arg("q"), "(D, extra) of a quantile state");
  m.def(
      "record",
      [](const QuantileDensity& q, double time, std::vector<double> p) {
        return to_python(io::to_json(record(q, time, SmythHill(q.mass()), p)));
      },
      py::arg("q"), py::arg("time") = 0.0, py::arg("p_values") = kDefaultPValues);

  m.def("w2", &w2, py::arg("a"), py::arg("b"));
  m.def(
      "w2_sq_atoms",
      [](const std::vector<std::pair<double, double>>& a,
         const std::vector<std::pair<double, double>>& b) {
        return w2_sq_atoms(to_atoms(a), to_atoms(b));
      },
      py::arg("a"), py::arg("b"), "atoms as (x, mass) pairs");
  m.def(
      "w2_bruteforce",
      [](const std::vector<std::pair<double, double>>& a,
         const std::vector<std::pair<double, double>>& b) {
        return w2_bruteforce(to_atoms(a), to_atoms(b));
      },
      py::arg("a"), py::arg("b"), "W2^2 by min-cost flow, at most 12 atoms each");

  py::class_<JkoConfig>(m, "JkoConfig")
      .def(py::init<>())
      .def_readwrite("tau", &JkoConfig::tau)
      .def_readwrite("n_cells", &JkoConfig::n_cells)
      .def_readwrite("inner_tol", &JkoConfig::inner_tol)
      .def_readwrite("max_inner_iters", &JkoConfig::max_inner_iters)
      .def_readwrite("p_values", &JkoConfig::p_values);

  m.def(
      "run",
      [](const QuantileDensity& q, double t_final, const JkoConfig& config) {
        JkoTrajectory traj;
        {
          py::gil_scoped_release release;
          traj = run(q, t_final, config, SmythHill(q.mass()));
        }
        py::list out;
        for (const Snapshot& s : traj.snapshots) out.append(snapshot_dict(s));
        return out;
      },
      py::arg("initial"), py::arg("t_final"), py::arg("config") = JkoConfig{},
      "List of snapshot dicts with time, positions, record and diagnostics");

  m.def(
      "parse_initial_condition",
      [](const std::string& spec, double mass, std::size_t n) {
        return parse_initial_condition(spec, mass).quantiles(n);
      },
      py::arg("spec"), py::arg("mass"), py::arg("n") = 400);

  m.def(
      "static_suite",
      [](const GridDensity& g) {
        const auto reps = static_suite(g, SmythHill(g.mass()));
        return to_python(io::to_json(reps));
      },
      py::arg("grid"));

  m.def(
      "fit_rate",
      [](const std::vector<double>& t, const std::vector<double>& v, double t_lo, double t_hi,
         double floor) { return to_python(io::to_json(fit_rate(t, v, t_lo, t_hi, floor))); },
      py::arg("times"), py::arg("values"), py::arg("t_lo"), py::arg("t_hi"),
      py::arg("floor") = 0.0);

  m.def(
      "fdm_integrate",
      [](const GridDensity& g, double t_final, bool inflow_walls) {
        FdmConfig c;
        c.inflow_walls = inflow_walls;
        return integrate(g, t_final, c);
      },
      py::arg("grid"), py::arg("t_final"), py::arg("inflow_walls") = false);

  m.def(
      "crossvalidate",
      [](const std::string& spec, double mass, double t_final, const JkoConfig& config) {
        const InitialCondition ic = parse_initial_condition(spec, mass);
        if (!ic.grid) throw std::invalid_argument("crossvalidate: spec has no grid form");
        FdmConfig f;
        f.inflow_walls = true;
        const CrossvalResult r = crossvalidate(*ic.grid, t_final, config, f);
        py::dict d;
        d["l1_gap"] = r.l1_gap;
        d["reconstruction_floor"] = r.reconstruction_floor;
        d["fdm_mass_drift"] = r.fdm_mass_drift;
        d["jko_mass_drift"] = r.jko_mass_drift;
        d["jko_steps"] = r.jko_steps;
        return d;
      },
      py::arg("spec"), py::arg("mass"), py::arg("t_final"), py::arg("config") = JkoConfig{});

  py::register_exception<io::FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_ValueError);
}
