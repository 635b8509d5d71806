#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "snowbranch/continuation.hpp"
#include "snowbranch/digraph.hpp"
#include "snowbranch/errors.hpp"
#include "snowbranch/geometry.hpp"
#include "snowbranch/gnga.hpp"
#include "snowbranch/group.hpp"
#include "snowbranch/io.hpp"
#include "snowbranch/spectrum.hpp"

namespace py = pybind11;
using namespace snowbranch;

namespace {

Eigen::MatrixXd grid_points(const SnowflakeGrid& g) {
  Eigen::MatrixXd out(g.size(), 2);
  for (int i = 0; i < g.size(); ++i) {
    const auto p = g.point(i);
    out(i, 0) = p.x;
    out(i, 1) = p.y;
  }
  return out;
}

py::dict point_dict(const SolutionPoint& p) {
  py::dict d;
  d["lambda"] = p.lambda;
  d["a"] = p.a;
  d["J"] = p.J;
  d["gradient_norm"] = p.gradient_norm;
  d["morse_index"] = p.morse_index;
  d["symmetry_type"] = p.symmetry_type;
  return d;
}

}  // namespace

PYBIND11_MODULE(_snowbranch, m) {
  m.doc() = "Symmetry-adapted Newton-Galerkin bifurcation diagrams on the Koch snowflake";
  m.attr("__version__") = version_string();

  // later registrations are tried first, so the base class goes first
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<SnowflakeGrid>(m, "Grid")
      .def_property_readonly("level", &SnowflakeGrid::level)
      .def_property_readonly("spacing", &SnowflakeGrid::spacing)
      .def_property_readonly("size", &SnowflakeGrid::size)
      .def("__len__", &SnowflakeGrid::size)
      .def("points", &grid_points, "N x 2 array of point coordinates")
      .def("neighbors", [](const SnowflakeGrid& g, int i) {
        if (i < 0 || i >= g.size()) throw py::index_error("grid index out of range");
        const auto s = g.neighbors(i);
        return std::vector<int>(s.begin(), s.end());
      });
  m.def("build_grid", &build_grid, py::arg("level"));
  m.def("expected_point_count", &expected_point_count, py::arg("level"));

  m.def("symmetry_type_names", [] {
    std::vector<std::string> out;
    for (const auto& t : symmetry_tables().types()) out.push_back(t.name);
    return out;
  });
  m.def("digraph_edges", [] {
    std::vector<std::tuple<int, int, std::string, std::string, int>> out;
    for (const auto& e : bifurcation_digraph().edges())
      out.emplace_back(e.mother, e.daughter, e.quotient, style_name(e.style), e.irrep_dim);
    return out;
  }, "Edges as (mother, daughter, quotient, style, irrep_dim)");
  m.def("bifurcation_kind_count", [] { return bifurcation_digraph().kinds().size(); });

  py::class_<EigenBasis>(m, "Basis")
      .def_property_readonly("level", &EigenBasis::level)
      .def_property_readonly("size", &EigenBasis::size)
      .def_property_readonly("requested_size", &EigenBasis::requested_size)
      .def_property_readonly("weight", &EigenBasis::weight)
      .def_property_readonly("eigenvalues", &EigenBasis::eigenvalues)
      .def_property_readonly("modes", &EigenBasis::modes)
      .def("tags", &EigenBasis::tags, py::arg("type"))
      .def("invariant_modes", &EigenBasis::invariant_modes, py::arg("type"))
      .def("save", [](const EigenBasis& b, const std::string& path) {
        RunConfig cfg;
        cfg.level = b.level();
        cfg.modes = b.requested_size();
        save_basis(path, b, cfg);
      });
  m.def("compute_basis", [](int level, int modes, const std::string& method, std::uint64_t seed) {
    EigenOptions o;
    o.method = method;
    o.seed = seed;
    py::gil_scoped_release release;
    return compute_basis(level, modes, o);
  }, py::arg("level"), py::arg("modes"), py::arg("method") = "auto", py::arg("seed") = 1);
  m.def("load_basis", [](const std::string& path) { return load_basis(path); }, py::arg("path"));

  py::class_<GalerkinProblem>(m, "Problem")
      .def(py::init<const EigenBasis&>(), py::keep_alive<1, 2>(), py::arg("basis"))
      .def_property_readonly("size", &GalerkinProblem::size)
      .def("energy", &GalerkinProblem::energy, py::arg("lam"), py::arg("a"))
      .def("gradient", py::overload_cast<double, const Eigen::VectorXd&>(&GalerkinProblem::gradient, py::const_),
           py::arg("lam"), py::arg("a"))
      .def("hessian", py::overload_cast<double, const Eigen::VectorXd&>(&GalerkinProblem::hessian, py::const_),
           py::arg("lam"), py::arg("a"))
      .def("evaluate", &GalerkinProblem::evaluate_on_grid, py::arg("a"))
      .def("value_at_generic", [](const GalerkinProblem& p, const Eigen::VectorXd& a) {
        return p.value_at(a, kGenericPoint);
      })
      .def("symmetry_type", [](const GalerkinProblem& p, const Eigen::VectorXd& a) {
        return symmetry_tables().type_of(p.stabilizer(a));
      })
      .def("newton", [](const GalerkinProblem& p, double lam, const Eigen::VectorXd& a0, int type, double tol) {
        NewtonSettings ns;
        ns.tol = tol;
        if (type >= 0) {
          ns.subset = p.basis().invariant_modes(type);
          ns.expected_type = type;
        }
        const auto r = p.newton_gnga(lam, a0, ns);
        py::dict d = point_dict(r.point);
        d["status"] = newton_status_name(r.status);
        d["iterations"] = r.iterations;
        return d;
      }, py::arg("lam"), py::arg("a0"), py::arg("type") = -1, py::arg("tol") = 1e-8);

  m.def("run", [](const py::dict& options) {
    RunConfig cfg;
    for (const auto& [k, v] : options) cfg.set(py::str(k).cast<std::string>(), py::str(v).cast<std::string>());
    cfg.validate();
    EigenBasis basis;
    Diagram dia;
    {
      py::gil_scoped_release release;
      basis = obtain_basis(cfg);
      GalerkinProblem problem(basis);
      dia = orchestrate(problem, cfg.continuation());
    }
    py::list branches;
    for (const auto& b : dia.branches) {
      py::dict d;
      d["id"] = b.id;
      d["symmetry_type"] = b.symmetry_type;
      d["parent"] = b.parent_branch;
      d["status"] = branch_status_name(b.status);
      py::list pts;
      for (const auto& p : b.points) pts.append(point_dict(p));
      d["points"] = pts;
      branches.append(d);
    }
    py::list records;
    for (const auto& r : dia.records) {
      py::dict d;
      d["id"] = r.id;
      d["lambda_star"] = r.lambda_star;
      d["mother"] = r.mother_branch;
      d["mi_before"] = r.mi_before;
      d["mi_after"] = r.mi_after;
      d["center_dim"] = r.center_dim;
      d["clean"] = r.clean;
      d["daughters"] = r.daughters;
      records.append(d);
    }
    py::dict out;
    out["branches"] = branches;
    out["records"] = records;
    out["warnings"] = dia.warnings;
    out["cap_exhausted"] = dia.cap_exhausted;
    return out;
  }, py::arg("options"), "Run a diagram; options are config keys as in the CLI");
}
