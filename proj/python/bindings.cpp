// Python bindings: meshes, operators, norms, the scheme and its diagnostics.
// Cell fields cross the boundary as 1-D float64 arrays; trajectories as
// (N+1, cells) arrays.

#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "p1fv/convergence.hpp"
#include "p1fv/diagnostics.hpp"
#include "p1fv/discrete_space.hpp"
#include "p1fv/error.hpp"
#include "p1fv/io.hpp"
#include "p1fv/mesh.hpp"
#include "p1fv/scheme.hpp"

namespace py = pybind11;
using namespace p1fv;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

using DiscPtr = std::shared_ptr<const Discretization>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw MeshMismatchError("expected a 1-D array of cell values");
  return {a.data(), a.data() + a.size()};
}

CellField to_field(const Discretization& disc, const Array& a) {
  std::vector<double> v = to_vector(a);
  if (v.size() != disc.num_cells()) {
    throw MeshMismatchError("field has " + std::to_string(v.size()) + " values, mesh has " +
                            std::to_string(disc.num_cells()) + " cells");
  }
  return disc.field(std::move(v));
}

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Array to_array(const SpaceTimeField& f) {
  const std::size_t rows = f.num_intervals() + 1, cols = f.mesh().num_cells();
  Array out({static_cast<py::ssize_t>(rows), static_cast<py::ssize_t>(cols)});
  double* p = out.mutable_data();
  for (const CellField& c : f.steps()) p = std::copy(c.values().begin(), c.values().end(), p);
  return out;
}

SpaceTimeField to_spacetime(const Discretization& disc, const Array& a, double dt) {
  if (a.ndim() != 2) throw MeshMismatchError("expected a (steps + 1, cells) array");
  std::vector<CellField> steps;
  const auto rows = static_cast<std::size_t>(a.shape(0)), cols = static_cast<std::size_t>(a.shape(1));
  if (cols != disc.num_cells() || rows < 2) throw MeshMismatchError("trajectory array has the wrong shape");
  for (std::size_t n = 0; n < rows; ++n) {
    steps.push_back(disc.field(std::vector<double>(a.data() + n * cols, a.data() + (n + 1) * cols)));
  }
  return SpaceTimeField(std::move(steps), dt, dt * static_cast<double>(rows - 1));
}

Array matrix_dense(const SparseSpdMatrix& a) {
  const auto n = static_cast<py::ssize_t>(a.dim());
  Array out({n, n});
  std::fill(out.mutable_data(), out.mutable_data() + n * n, 0.0);
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t p = a.row_start()[i]; p < a.row_start()[i + 1]; ++p) {
      out.mutable_at(static_cast<py::ssize_t>(i), static_cast<py::ssize_t>(a.col_index()[p])) = a.values()[p];
    }
  }
  return out;
}

/// u0: a number, "bump", or an array of cell values.
InitialCondition initial_condition(const Discretization& disc, const py::object& u0) {
  if (py::isinstance<py::str>(u0)) {
    const std::string s = u0.cast<std::string>();
    if (s == "bump") return bump_initial(disc.mesh());
    throw ConfigError("unknown initial condition '" + s + "' (expected a number, 'bump' or an array)");
  }
  if (py::isinstance<py::float_>(u0) || py::isinstance<py::int_>(u0)) return InitialCondition::uniform(u0.cast<double>());
  return InitialCondition::from_cells(to_vector(u0.cast<Array>()));
}

struct PyTrajectory {
  DiscPtr disc;
  Trajectory traj;
};

py::dict admissibility_dict(const AdmissibilityReport& r) {
  py::dict d;
  d["passed"] = r.passed;
  d["theta"] = r.theta;
  d["circumcenters_outside"] = r.circumcenters_outside;
  d["degenerate_faces"] = r.degenerate_faces;
  d["min_d_sigma_ratio"] = r.min_d_sigma_ratio;
  d["first_failing_cell"] = r.first_failing_cell == kNoCell ? py::object(py::none()) : py::int_(r.first_failing_cell);
  d["summary"] = r.summary();
  return d;
}

py::dict energy_dict(const EnergyReport& r) {
  py::dict d;
  d["l2_h1_u"] = r.l2_h1_u;
  d["hminus1_dt_u"] = r.hminus1_dt_u;
  d["l2_phi"] = r.l2_phi;
  d["l2_h1_semi_phi"] = r.l2_h1_semi_phi;
  d["l2_dt_phi"] = r.l2_dt_phi;
  std::vector<double> lhs, rhs;
  for (const EnergyStep& s : r.steps) {
    lhs.push_back(s.l2_lhs);
    rhs.push_back(s.l2_rhs);
  }
  d["step_l2_lhs"] = lhs;
  d["step_l2_rhs"] = rhs;
  d["steps_ok"] = r.steps_ok;
  d["phi_ok"] = r.phi_ok;
  d["summed_ok"] = r.summed_ok;
  d["passed"] = r.passed;
  d["summary"] = r.summary();
  return d;
}

py::dict table_dict(const ConvergenceTable& t) {
  py::dict d;
  std::vector<double> diff_u, diff_phi, error_u, error_phi;
  std::vector<std::size_t> cells;
  for (const CauchyRow& r : t.cauchy) {
    diff_u.push_back(r.diff_u);
    diff_phi.push_back(r.diff_phi);
  }
  for (const ConvergenceLevel& l : t.levels) {
    cells.push_back(l.num_cells);
    error_u.push_back(l.error_u);
    error_phi.push_back(l.error_phi);
  }
  d["cells"] = cells;
  d["diff_u"] = diff_u;
  d["diff_phi"] = diff_phi;
  d["strictly_decreasing"] = t.strictly_decreasing();
  d["last_ratio_u"] = t.cauchy.size() >= 2 ? py::object(py::float_(t.last_ratio_u())) : py::object(py::none());
  if (t.manufactured) {
    d["error_u"] = error_u;
    d["error_phi"] = error_phi;
    d["order_u"] = t.order_u();
    d["order_phi"] = t.order_phi();
  }
  d["csv"] = t.to_csv();
  return d;
}

}  // namespace

PYBIND11_MODULE(_p1fv, m) {
  m.doc() = "Finite volume solver for a coupled radiative heat transfer model";

  // Translators run newest first, so the base class goes in first.
  const py::handle base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base);
  py::register_exception<TopologyError>(m, "TopologyError", base);
  py::register_exception<AdmissibilityError>(m, "AdmissibilityError", base);
  py::register_exception<MeshMismatchError>(m, "MeshMismatchError", base);
  py::register_exception<SolverError>(m, "SolverError", base);
  py::register_exception<NonlinearSolverError>(m, "NonlinearSolverError", base);
  py::register_exception<MaxPrincipleViolation>(m, "MaxPrincipleViolation", base);
  py::register_exception<ConfigError>(m, "ConfigError", base);

  py::class_<Mesh>(m, "Mesh")
      .def(py::init([](const std::vector<std::array<double, 2>>& vertices,
                       const std::vector<std::array<std::size_t, 3>>& cells) {
             std::vector<Point2> pts;
             for (const auto& v : vertices) pts.push_back({v[0], v[1]});
             return Mesh(std::move(pts), cells);
           }),
           py::arg("vertices"), py::arg("cells"))
      .def_property_readonly("num_cells", &Mesh::num_cells)
      .def_property_readonly("num_faces", &Mesh::num_faces)
      .def_property_readonly("num_boundary_faces", &Mesh::num_boundary_faces)
      .def_property_readonly("vertices",
                             [](const Mesh& mesh) {
                               std::vector<std::array<double, 2>> out;
                               for (const Point2& p : mesh.vertices()) out.push_back({p.x, p.y});
                               return out;
                             })
      .def_property_readonly("cells", &Mesh::cells)
      .def("to_text", [](const Mesh& mesh) {
        std::ostringstream out;
        write_mesh(out, mesh);
        return out.str();
      });

  m.def("load_mesh", &load_mesh_file, py::arg("path"));
  m.def(
      "parse_mesh",
      [](const std::string& text) {
        std::istringstream in(text);
        return load_mesh(in);
      },
      py::arg("text"));
  m.def("rectangle_mesh", &rectangle_mesh, py::arg("nx"), py::arg("ny"), py::arg("lx") = 1.0, py::arg("ly") = 1.0);
  m.def("equilateral_mesh", &equilateral_mesh, py::arg("nx"), py::arg("ny"), py::arg("edge") = 1.0);
  m.def("refine_uniform", &refine_uniform, py::arg("mesh"));
  m.def(
      "check_admissibility",
      [](const Mesh& mesh) { return admissibility_dict(check_admissibility(mesh, build_geometry(mesh, false))); },
      py::arg("mesh"));

  py::class_<Discretization, std::shared_ptr<Discretization>>(m, "Discretization")
      .def(py::init<Mesh>(), py::arg("mesh"))
      .def_property_readonly("mesh", &Discretization::mesh, py::return_value_policy::reference_internal)
      .def_property_readonly("num_cells", &Discretization::num_cells)
      .def_property_readonly("h", [](const Discretization& d) { return d.geometry().h; })
      .def_property_readonly("theta", [](const Discretization& d) { return d.geometry().theta; })
      .def_property_readonly("domain_measure", [](const Discretization& d) { return d.geometry().domain_measure; })
      .def_property_readonly("domain_diameter", [](const Discretization& d) { return d.geometry().domain_diameter; })
      .def_property_readonly("mass", [](const Discretization& d) { return to_array(d.laplacians().mass); })
      .def("dirichlet_matrix", [](const Discretization& d) { return matrix_dense(d.laplacians().dirichlet); })
      .def("neumann_matrix", [](const Discretization& d) { return matrix_dense(d.laplacians().neumann); })
      .def("laplacian_dirichlet",
           [](const Discretization& d, const Array& u) {
             return to_array(apply_laplacian_dirichlet(d, to_field(d, u)).values());
           })
      .def("laplacian_neumann",
           [](const Discretization& d, const Array& u) {
             return to_array(apply_laplacian_neumann(d, to_field(d, u)).values());
           })
      .def("project", [](const Discretization& d, const std::function<double(double, double)>& f, int levels) {
             const PointFunction pf = [&](Point2 p) { return f(p.x, p.y); };
             const QuadratureRule rule = levels > 0 ? QuadratureRule::subdivision(levels) : QuadratureRule::edge_midpoint();
             return to_array(project_initial(d, pf, rule).values());
           }, py::arg("f"), py::arg("subdivision_levels") = 0);

  const auto binary = [&](const char* name, double (*fn)(const Discretization&, const CellField&, const CellField&)) {
    m.def(
        name, [fn](const Discretization& d, const Array& u, const Array& v) { return fn(d, to_field(d, u), to_field(d, v)); },
        py::arg("disc"), py::arg("u"), py::arg("v"));
  };
  binary("inner_dirichlet", &inner_dirichlet);
  binary("inner_neumann", &inner_neumann);
  binary("l2_inner", &l2_inner);
  const auto unary = [&](const char* name, double (*fn)(const Discretization&, const CellField&)) {
    m.def(name, [fn](const Discretization& d, const Array& u) { return fn(d, to_field(d, u)); }, py::arg("disc"),
          py::arg("u"));
  };
  unary("norm_1M", &norm_1M);
  unary("seminorm_1M", &seminorm_1M);
  unary("l2_norm", &l2_norm);
  m.def(
      "dual_norm_minus1", [](const Discretization& d, const Array& u) { return dual_norm_minus1(d, to_field(d, u)); },
      py::arg("disc"), py::arg("u"));

  py::class_<PyTrajectory>(m, "Trajectory")
      .def_property_readonly("u", [](const PyTrajectory& t) { return to_array(t.traj.u); })
      .def_property_readonly("phi", [](const PyTrajectory& t) { return to_array(t.traj.phi); })
      .def_property_readonly("dt", [](const PyTrajectory& t) { return t.traj.u.dt(); })
      .def_property_readonly("final_time", [](const PyTrajectory& t) { return t.traj.u.final_time(); })
      .def_property_readonly("num_steps", [](const PyTrajectory& t) { return t.traj.u.num_intervals(); })
      .def_property_readonly("nonlinear_iterations",
                             [](const PyTrajectory& t) {
                               std::vector<std::size_t> it;
                               for (const StepStats& s : t.traj.stats) it.push_back(s.nonlinear_iterations);
                               return it;
                             })
      .def("write", [](const PyTrajectory& t, const std::filesystem::path& dir, bool csv, bool vtk,
                       std::size_t vtk_stride) {
             OutputOptions o;
             o.csv = csv;
             o.vtk = vtk;
             o.vtk_stride = vtk_stride;
             return write_fields(t.traj, o, dir);
           }, py::arg("directory"), py::arg("csv") = true, py::arg("vtk") = true, py::arg("vtk_stride") = 0);

  m.def(
      "run",
      [](std::shared_ptr<Discretization> disc, double dt, double final_time, const py::object& u0,
         const std::string& solver, double newton_tol) {
        SchemeConfig cfg;
        cfg.dt = dt;
        cfg.final_time = final_time;
        cfg.newton_tol = newton_tol;
        cfg.u0 = initial_condition(*disc, u0);
        if (solver == "picard") {
          cfg.nonlinear_solver = NonlinearSolver::Picard;
        } else if (solver != "newton") {
          throw ConfigError("solver must be 'newton' or 'picard'");
        }
        Trajectory traj = [&] {
          py::gil_scoped_release release;
          return run(*disc, cfg);
        }();
        return PyTrajectory{disc, std::move(traj)};
      },
      py::arg("disc"), py::arg("dt"), py::arg("final_time"), py::arg("u0") = 1.0, py::arg("solver") = "newton",
      py::arg("newton_tol") = 1e-12);

  m.def(
      "check_max_principle",
      [](const PyTrajectory& t, double rel_tol) {
        const MaxPrincipleReport r = check_max_principle(t.traj, rel_tol);
        py::dict d;
        d["passed"] = r.passed;
        d["fail_step"] = r.passed ? py::object(py::none()) : py::int_(r.fail_step);
        d["fail_cell"] = r.passed ? py::object(py::none()) : py::int_(r.fail_cell);
        d["summary"] = r.summary();
        return d;
      },
      py::arg("trajectory"), py::arg("rel_tol") = 1e-10);
  m.def(
      "mean_identity_defect",
      [](const PyTrajectory& t) { return mean_identity_defect(*t.disc, t.traj.u, t.traj.phi); }, py::arg("trajectory"));
  m.def(
      "energy_budget", [](const PyTrajectory& t) { return energy_dict(energy_budget(*t.disc, t.traj)); },
      py::arg("trajectory"));
  m.def(
      "time_translate",
      [](const Discretization& disc, const Array& f, double dt, double tau, const std::string& norm) {
        const SpaceTimeField st = to_spacetime(disc, f, dt);
        NormKind kind = NormKind::L2;
        if (norm == "dirichlet_h1") {
          kind = NormKind::DirichletH1;
        } else if (norm != "l2") {
          throw ConfigError("norm must be 'dirichlet_h1' or 'l2'");
        }
        const TranslateReport r = time_translate_sq(disc, st, tau, kind);
        py::dict d;
        d["lhs"] = r.lhs;
        d["rhs"] = r.rhs;
        d["passed"] = r.passed;
        return d;
      },
      py::arg("disc"), py::arg("f"), py::arg("dt"), py::arg("tau"), py::arg("norm") = "l2");
  m.def(
      "space_translate",
      [](const Discretization& disc, const Array& v, double ex, double ey) {
        const SpaceTranslateReport r = space_translate_sq(disc, to_field(disc, v), {ex, ey});
        py::dict d;
        d["lhs"] = r.lhs;
        d["bound_neumann"] = r.bound_neumann;
        d["bound_dirichlet"] = r.bound_dirichlet;
        d["neumann_ok"] = r.neumann_ok;
        d["c_min"] = r.c_min;
        return d;
      },
      py::arg("disc"), py::arg("v"), py::arg("eta_x"), py::arg("eta_y"));
  m.def(
      "chi_identities",
      [](std::size_t n, double dt, double tau, const Array& alphas, std::size_t sweep_points) {
        const std::vector<double> a = to_vector(alphas);
        const ChiIdentities c = chi_identities(n, dt, tau, a, sweep_points);
        py::dict d;
        d["integral"] = c.integral;
        d["formula"] = c.formula;
        d["integral_exact"] = c.integral_exact;
        d["window_max"] = c.window_max;
        d["window_bound_ok"] = c.window_bound_ok;
        return d;
      },
      py::arg("num_steps"), py::arg("dt"), py::arg("tau"), py::arg("alphas"), py::arg("sweep_points") = 1000);

  m.def(
      "convergence_study",
      [](std::size_t base, double dt, double final_time, std::size_t levels, const std::string& problem) {
        SchemeConfig cfg;
        cfg.dt = dt;
        cfg.final_time = final_time;
        ConvergenceOptions opt;
        opt.levels = levels;
        if (problem == "manufactured") {
          const ManufacturedProblem mp = unit_square_manufactured();
          cfg.u0 = mp.u0;
          cfg.sources = mp.sources;
          opt.exact = mp.exact;
        } else if (problem == "constant") {
          cfg.u0 = InitialCondition::uniform(1.0);
        } else if (problem == "bump") {
          cfg.u0 = bump_initial(rectangle_mesh(1, 1));
        } else {
          throw ConfigError("problem must be 'bump', 'constant' or 'manufactured'");
        }
        ConvergenceTable table = [&] {
          py::gil_scoped_release release;
          return convergence_study(rectangle_levels(base), cfg, opt);
        }();
        return table_dict(table);
      },
      py::arg("base"), py::arg("dt"), py::arg("final_time"), py::arg("levels") = 3, py::arg("problem") = "bump");
}
