#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "msle/burgers.hpp"
#include "msle/cli.hpp"
#include "msle/convergence.hpp"
#include "msle/delta0.hpp"
#include "msle/error.hpp"
#include "msle/loewner.hpp"
#include "msle/sde.hpp"

namespace py = pybind11;
using namespace msle;

namespace {

py::dict hull_dict(const Hull& h) {
  std::vector<double> xs, ys;
  for (const cplx& p : h.boundary) {
    xs.push_back(p.real());
    ys.push_back(p.imag());
  }
  py::dict d;
  d["t"] = h.t;
  d["x"] = py::array_t<double>(xs.size(), xs.data());
  d["y"] = py::array_t<double>(ys.size(), ys.data());
  d["footprint"] = py::make_tuple(h.footprint.lo, h.footprint.hi);
  d["flags"] = h.flags;
  d["svg"] = hull_svg(h);
  return d;
}

py::tuple interval(const Interval& i) { return py::make_tuple(i.lo, i.hi); }

}  // namespace

PYBIND11_MODULE(_msle, m) {
  m.doc() = "Multiple SLE particle systems, Loewner flows and their Burgers limit";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const DomainError& e) {
      py::set_error(PyExc_ValueError, e.what());
    }
  });

  py::class_<ProbabilityMeasure>(m, "Measure")
      .def_static("point_mass", &ProbabilityMeasure::point_mass, py::arg("at") = 0.0)
      .def_static("uniform", &ProbabilityMeasure::uniform, py::arg("lo"), py::arg("hi"))
      .def_static("semicircle", &ProbabilityMeasure::semicircle, py::arg("center"), py::arg("radius"))
      .def_static("atomic", &ProbabilityMeasure::atomic, py::arg("atoms"), py::arg("weights"))
      .def_static("equal_weights", &ProbabilityMeasure::equal_weights, py::arg("atoms"))
      .def_property_readonly("atoms", [](const ProbabilityMeasure& p) { return std::vector<double>(p.atoms().begin(), p.atoms().end()); })
      .def_property_readonly("weights", [](const ProbabilityMeasure& p) { return std::vector<double>(p.weights().begin(), p.weights().end()); })
      .def("support", [](const ProbabilityMeasure& p) { return interval(p.support()); })
      .def("cdf", &ProbabilityMeasure::cdf)
      .def("moment", &ProbabilityMeasure::moment)
      .def("to_json", [](const ProbabilityMeasure& p) { return p.to_json().dump(); });

  m.def("cauchy_transform", &cauchy_transform, py::arg("m"), py::arg("z"));
  m.def("discretize", &discretize, py::arg("target"), py::arg("n"));
  m.def("transform_distance",
        [](const ProbabilityMeasure& a, const ProbabilityMeasure& b, const std::vector<cplx>& pts) {
          return transform_distance(a, b, pts);
        },
        py::arg("a"), py::arg("b"), py::arg("points"));

  m.def("simulate",
        [](std::vector<double> x0, double kappa, double t_max, double dt, std::uint64_t seed, double theta,
           std::vector<double> lambdas, const std::string& scheme, std::vector<double> observe) {
          SdeConfig c;
          c.x0 = std::move(x0);
          c.kappa = kappa;
          c.t_max = t_max;
          c.dt_base = dt;
          c.seed = seed;
          c.theta = theta;
          c.lambdas = std::move(lambdas);
          if (scheme == "heun") {
            c.scheme = Scheme::Heun;
          } else if (scheme != "euler") {
            throw DomainError("scheme must be 'euler' or 'heun'");
          }
          const DrivingPaths p = simulate(c, RecordPolicy{std::move(observe)});
          py::array_t<double> times(p.size());
          py::array_t<double> values({p.size(), p.n()});
          auto tv = times.mutable_unchecked<1>();
          auto vv = values.mutable_unchecked<2>();
          for (std::size_t i = 0; i < p.size(); ++i) {
            tv(i) = p.times()[i];
            const auto row = p.row(i);
            for (std::size_t k = 0; k < p.n(); ++k) vv(i, k) = row[k];
          }
          return py::make_tuple(times, values);
        },
        py::arg("x0"), py::arg("kappa") = 2.0, py::arg("t_max") = 1.0, py::arg("dt") = 1e-4,
        py::arg("seed") = 0, py::arg("theta") = 0.0, py::arg("lambdas") = std::vector<double>{},
        py::arg("scheme") = "euler", py::arg("observe") = std::vector<double>{},
        "Particle paths; returns (times, values[n_times, n]).");

  m.def("flow_map",
        [](const std::vector<double>& times, const std::vector<std::vector<double>>& rows, cplx z, double t) -> py::object {
          const auto r = flow_map(DrivingPaths::from_samples(times, rows), z, t);
          if (r.alive()) return py::cast(r.value);
          return py::none();
        },
        py::arg("times"), py::arg("rows"), py::arg("z"), py::arg("t"),
        "g_t(z) for drivers given as samples, or None once z is swallowed.");

  m.def("solve_shift", [](const ProbabilityMeasure& b, double t, cplx z) { return solve_shift(TransportedState(b, t), z); },
        py::arg("base"), py::arg("t"), py::arg("z"));
  m.def("transform_at", [](const ProbabilityMeasure& b, double t, cplx z) { return transform_at(TransportedState(b, t), z); },
        py::arg("base"), py::arg("t"), py::arg("z"));
  m.def("inverse_char_ode", &inverse_char_ode, py::arg("base"), py::arg("z"), py::arg("t"));
  m.def("limit_map", &limit_map, py::arg("base"), py::arg("z"), py::arg("t"));
  m.def("exit_time_real", &exit_time_real, py::arg("base"), py::arg("x0"));
  m.def("support_endpoints", [](const ProbabilityMeasure& b, double t) { return interval(support_endpoints(b, t)); },
        py::arg("base"), py::arg("t"));
  m.def("real_footprint", [](const ProbabilityMeasure& b, double t) { return interval(real_footprint(b, t)); },
        py::arg("base"), py::arg("t"));
  m.def("hull_lifetime", &hull_lifetime, py::arg("base"), py::arg("z"), py::arg("t_max"));
  m.def("hull_boundary", [](const ProbabilityMeasure& b, double t, int n) { return hull_dict(hull_boundary(b, t, n)); },
        py::arg("base"), py::arg("t"), py::arg("n_columns") = 64);

  m.def("lambert_w0", &delta0::lambert_w0, py::arg("z"));
  m.def("oracle_transform", &delta0::oracle_transform, py::arg("z"), py::arg("t"));
  m.def("oracle_maps", [](cplx z, double t) {
    const auto r = delta0::oracle_maps(z, t);
    return py::make_tuple(r.h, r.g);
  }, py::arg("z"), py::arg("t"));
  m.def("oracle_intervals", [](double t) {
    const auto r = delta0::oracle_intervals(t);
    return py::make_tuple(interval(r.support), interval(r.footprint));
  }, py::arg("t"));

  m.def("run_cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return py::make_tuple(code, out.str(), err.str());
  }, py::arg("args"), "Runs the command line in-process; returns (exit_code, stdout, stderr).");
}
