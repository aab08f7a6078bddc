#include "p1fv/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "p1fv/convergence.hpp"
#include "p1fv/diagnostics.hpp"
#include "p1fv/error.hpp"

namespace p1fv {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

class ValueReader {
 public:
  ValueReader(std::size_t line, std::string key, std::string_view value)
      : line_(line), key_(std::move(key)), value_(value) {}

  double real() const {
    double x = 0.0;
    const auto [ptr, ec] = std::from_chars(value_.data(), value_.data() + value_.size(), x);
    if (ec != std::errc() || ptr != value_.data() + value_.size() || !std::isfinite(x)) fail("a finite number");
    return x;
  }

  std::size_t count() const {
    std::size_t x = 0;
    const auto [ptr, ec] = std::from_chars(value_.data(), value_.data() + value_.size(), x);
    if (ec != std::errc() || ptr != value_.data() + value_.size()) fail("a nonnegative integer");
    return x;
  }

  bool boolean() const {
    const std::string v = lower(value_);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    fail("true or false");
    return false;
  }

  template <typename T>
  T choice(const std::map<std::string, T>& options) const {
    const auto it = options.find(lower(value_));
    if (it == options.end()) {
      std::string names;
      for (const auto& [name, _] : options) names += (names.empty() ? "" : ", ") + name;
      fail("one of: " + names);
    }
    return it->second;
  }

  std::string text() const {
    if (value_.empty()) fail("a non-empty value");
    return std::string(value_);
  }

 private:
  std::size_t line_;
  std::string key_;
  std::string_view value_;

  [[noreturn]] void fail(const std::string& expected) const {
    std::ostringstream msg;
    msg << "line " << line_ << ": invalid value '" << value_ << "' for " << key_ << " (expected " << expected << ")";
    throw ParseError(msg.str());
  }
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

bool is_unit_square(const Mesh& mesh) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const Point2& p : mesh.vertices()) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const double tol = 1e-12;
  return std::abs(x0) <= tol && std::abs(y0) <= tol && std::abs(x1 - 1.0) <= tol && std::abs(y1 - 1.0) <= tol;
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  RunConfig cfg;
  bool ny_given = false;
  std::set<std::string> seen;
  using Handler = std::function<void(const ValueReader&)>;
  const std::map<std::string, Handler> handlers = {
      {"mesh",
       [&](const ValueReader& v) {
         const std::string m = v.text();
         if (lower(m) == "rectangle") {
           cfg.mesh_kind = MeshKind::Rectangle;
         } else if (lower(m) == "equilateral") {
           cfg.mesh_kind = MeshKind::Equilateral;
         } else {
           cfg.mesh_kind = MeshKind::File;
           cfg.mesh_path = m;
         }
       }},
      {"nx", [&](const ValueReader& v) { cfg.nx = v.count(); }},
      {"ny",
       [&](const ValueReader& v) {
         cfg.ny = v.count();
         ny_given = true;
       }},
      {"lx", [&](const ValueReader& v) { cfg.lx = v.real(); }},
      {"ly", [&](const ValueReader& v) { cfg.ly = v.real(); }},
      {"edge", [&](const ValueReader& v) { cfg.edge = v.real(); }},
      {"dt", [&](const ValueReader& v) { cfg.dt = v.real(); }},
      {"t", [&](const ValueReader& v) { cfg.final_time = v.real(); }},
      {"u0",
       [&](const ValueReader& v) {
         cfg.u0 = v.choice<InitialKind>(
             {{"constant", InitialKind::Constant}, {"bump", InitialKind::Bump}, {"csv", InitialKind::Csv}});
       }},
      {"u0_constant", [&](const ValueReader& v) { cfg.u0_constant = v.real(); }},
      {"u0_csv", [&](const ValueReader& v) { cfg.u0_csv = v.text(); }},
      {"nonlinear_solver",
       [&](const ValueReader& v) {
         cfg.nonlinear_solver =
             v.choice<NonlinearSolver>({{"newton", NonlinearSolver::Newton}, {"picard", NonlinearSolver::Picard}});
       }},
      {"newton_tol", [&](const ValueReader& v) { cfg.newton_tol = v.real(); }},
      {"newton_max_iter", [&](const ValueReader& v) { cfg.newton_max_iter = v.count(); }},
      {"linear_rel_tol", [&](const ValueReader& v) { cfg.linear_rel_tol = v.real(); }},
      {"linear_max_iter", [&](const ValueReader& v) { cfg.linear_max_iter = v.count(); }},
      {"correction_rel_tol", [&](const ValueReader& v) { cfg.correction_rel_tol = v.real(); }},
      {"output_dir", [&](const ValueReader& v) { cfg.output_dir = v.text(); }},
      {"output_format",
       [&](const ValueReader& v) {
         const int f = v.choice<int>({{"csv", 1}, {"vtk", 2}, {"both", 3}});
         cfg.write_csv = (f & 1) != 0;
         cfg.write_vtk = (f & 2) != 0;
       }},
      {"vtk_stride", [&](const ValueReader& v) { cfg.vtk_stride = v.count(); }},
      {"check_operators", [&](const ValueReader& v) { cfg.check_operators = v.boolean(); }},
      {"check_max_principle", [&](const ValueReader& v) { cfg.check_max_principle = v.boolean(); }},
      {"check_energy", [&](const ValueReader& v) { cfg.check_energy = v.boolean(); }},
      {"check_translates", [&](const ValueReader& v) { cfg.check_translates = v.boolean(); }},
      {"check_chi", [&](const ValueReader& v) { cfg.check_chi = v.boolean(); }},
      {"verify_fields", [&](const ValueReader& v) { cfg.verify_fields = v.count(); }},
      {"seed", [&](const ValueReader& v) { cfg.seed = v.count(); }},
      {"manufactured", [&](const ValueReader& v) { cfg.manufactured = v.boolean(); }},
      {"levels", [&](const ValueReader& v) { cfg.levels = v.count(); }},
      {"parallel_levels", [&](const ValueReader& v) { cfg.parallel_levels = v.boolean(); }},
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = handlers.find(key);
    if (it == handlers.end()) {
      throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw ParseError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    it->second(ValueReader(line_no, key, value));
  }
  if (!ny_given) cfg.ny = cfg.nx;

  if (!(cfg.dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(cfg.final_time > 0.0)) throw ConfigError("T must be positive");
  (void)cfg.num_steps();
  if (cfg.u0_constant < 0.0) {
    std::ostringstream msg;
    msg << "u0_constant = " << cfg.u0_constant << " is negative; the model requires a nonnegative initial temperature";
    throw ConfigError(msg.str());
  }
  if (cfg.u0 == InitialKind::Csv && cfg.u0_csv.empty()) throw ConfigError("u0 = csv needs u0_csv");
  if (cfg.mesh_kind != MeshKind::File && (cfg.nx == 0 || cfg.ny == 0)) throw ConfigError("nx and ny must be positive");
  if (!(cfg.lx > 0.0) || !(cfg.ly > 0.0) || !(cfg.edge > 0.0)) throw ConfigError("mesh extents must be positive");
  if (!(cfg.newton_tol > 0.0) || !(cfg.linear_rel_tol > 0.0) || !(cfg.correction_rel_tol > 0.0)) {
    throw ConfigError("tolerances must be positive");
  }
  if (cfg.newton_max_iter == 0) throw ConfigError("newton_max_iter must be positive");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  RunConfig cfg = parse_config(text.str());
  cfg.base_dir = path.parent_path();
  return cfg;
}

Mesh RunConfig::build_mesh() const {
  switch (mesh_kind) {
    case MeshKind::Rectangle: return rectangle_mesh(nx, ny, lx, ly);
    case MeshKind::Equilateral: return equilateral_mesh(nx, ny, edge);
    case MeshKind::File: return load_mesh_file(resolve(base_dir, mesh_path).string());
  }
  throw ConfigError("unknown mesh kind");
}

SchemeConfig RunConfig::scheme(const Discretization& disc) const {
  SchemeConfig s;
  s.dt = dt;
  s.final_time = final_time;
  s.newton_tol = newton_tol;
  s.newton_max_iter = newton_max_iter;
  s.nonlinear_solver = nonlinear_solver;
  s.linear.rel_tol = linear_rel_tol;
  s.linear.max_iter = linear_max_iter;
  s.correction_rel_tol = correction_rel_tol;
  switch (u0) {
    case InitialKind::Constant: s.u0 = InitialCondition::uniform(u0_constant); break;
    case InitialKind::Bump: s.u0 = bump_initial(disc.mesh()); break;
    case InitialKind::Csv: {
      const auto path = resolve(base_dir, u0_csv);
      std::ifstream in(path, std::ios::binary);
      if (!in) throw Error("cannot open u0_csv file " + path.string());
      const CellField f = read_cell_field_csv(in, disc.mesh_ptr());
      s.u0 = InitialCondition::from_cells(std::vector<double>(f.values().begin(), f.values().end()));
      break;
    }
  }
  if (manufactured) {
    if (!is_unit_square(disc.mesh())) throw ConfigError("manufactured sources need a mesh of the unit square");
    const ManufacturedProblem mp = unit_square_manufactured();
    s.sources = mp.sources;
    s.u0 = mp.u0;
  }
  s.validate();
  return s;
}

OutputOptions RunConfig::output() const {
  OutputOptions o;
  o.csv = write_csv;
  o.vtk = write_vtk;
  o.vtk_stride = vtk_stride;
  return o;
}

int cmd_run(const RunConfig& cfg, std::ostream& log) {
  const Discretization disc(cfg.build_mesh());
  const SchemeConfig scheme = cfg.scheme(disc);
  log << "run: " << disc.num_cells() << " cells, " << scheme.num_steps() << " steps of " << scheme.dt << '\n';
  const Trajectory traj = run(disc, scheme);
  const auto files = write_fields(traj, cfg.output(), cfg.output_dir);

  std::size_t nonlinear = 0, linear = 0, damped = 0, clamped = 0;
  double worst_residual = 0.0;
  for (const auto& s : traj.stats) {
    nonlinear += s.nonlinear_iterations;
    linear += s.linear_iterations;
    damped += s.damped_steps;
    clamped += s.clamped_u + s.clamped_phi;
    worst_residual = std::max(worst_residual, s.nonlinear_residual);
  }
  std::ostringstream report;
  report << std::setprecision(10);
  report << "cells: " << disc.num_cells() << '\n'
         << "steps: " << scheme.num_steps() << '\n'
         << "dt: " << scheme.dt << '\n'
         << "T: " << scheme.final_time << '\n'
         << "solver: " << (scheme.nonlinear_solver == NonlinearSolver::Newton ? "newton" : "picard") << '\n'
         << "nonlinear_iterations: " << nonlinear << '\n'
         << "linear_iterations: " << linear << '\n'
         << "damped_steps: " << damped << '\n'
         << "clamped_values: " << clamped << '\n'
         << "max_scaled_residual: " << worst_residual << '\n'
         << "u_max_final: " << traj.u[traj.u.num_intervals()].max() << '\n'
         << "phi_max_final: " << traj.phi[traj.phi.num_intervals()].max() << '\n';
  bool ok = true;
  if (!scheme.sources) {
    const auto mp = check_max_principle(traj);
    ok = ok && mp.passed;
    report << mp.summary();
    const double mean = mean_identity_defect(disc, traj.u, traj.phi);
    report << "mean_identity_defect: " << mean << '\n' << "mean_identity: " << verdict(mean <= 1e-10) << '\n';
  }
  if (cfg.check_energy && !scheme.sources) report << energy_budget(disc, traj, scheme.linear).summary();
  const auto report_path = cfg.output_dir / "run_report.txt";
  write_text(report_path, report.str());
  log << report.str();
  for (const auto& f : files) log << "wrote " << f.string() << '\n';
  log << "wrote " << report_path.string() << '\n';
  return ok ? 0 : 1;
}

int cmd_check_mesh(const RunConfig& cfg, std::ostream& log) {
  const Mesh mesh = cfg.build_mesh();
  const GeometryTables tables = build_geometry(mesh, false);
  const AdmissibilityReport rep = check_admissibility(mesh, tables);
  std::ostringstream report;
  report << std::setprecision(10) << "faces: " << mesh.num_faces() << " (" << mesh.num_boundary_faces()
         << " boundary)\n"
         << "h: " << tables.h << '\n'
         << rep.summary();
  ensure_dir(cfg.output_dir);
  const auto path = cfg.output_dir / "mesh_report.txt";
  write_text(path, report.str());
  log << report.str() << "wrote " << path.string() << '\n';
  return rep.passed ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg, std::ostream& log) {
  bool all = true;
  std::ostringstream report;
  report << std::setprecision(10);
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    all = all && ok;
    report << "check " << name << ": " << verdict(ok);
    if (!detail.empty()) report << " (" << detail << ')';
    report << '\n';
  };
  auto finish = [&]() {
    report << "verify: " << verdict(all) << '\n';
    ensure_dir(cfg.output_dir);
    const auto path = cfg.output_dir / "verify_report.txt";
    write_text(path, report.str());
    log << report.str() << "wrote " << path.string() << '\n';
    return all ? 0 : 1;
  };

  Mesh mesh = cfg.build_mesh();
  {
    const GeometryTables tables = build_geometry(mesh, false);
    const AdmissibilityReport rep = check_admissibility(mesh, tables);
    std::ostringstream d;
    d << "theta_M " << rep.theta << ", outside " << rep.circumcenters_outside << ", degenerate faces "
      << rep.degenerate_faces;
    check("admissibility", rep.passed, d.str());
    if (!rep.passed) return finish();
  }
  const Discretization disc(std::move(mesh));
  const SchemeConfig scheme = cfg.scheme(disc);

  if (cfg.check_operators) {
    const auto ops = check_operator_identities(disc, cfg.verify_fields, cfg.seed);
    std::ostringstream d;
    d << "max rel " << std::max(ops.max_rel_dirichlet, ops.max_rel_neumann)
      << ", neumann rows zero " << ops.neumann_rows_zero;
    check("operator_identities", ops.identities_ok, d.str());
    std::ostringstream p;
    p << "max ratio " << ops.max_poincare_ratio;
    check("poincare", ops.poincare_ok, p.str());
    const auto st = verify_structure(disc.laplacians(), scheme.dt);
    check("m_matrix_structure", st.passed, "");
  }

  const Trajectory traj = run(disc, scheme);
  const bool manufactured = scheme.sources.has_value();
  if (cfg.check_max_principle && !manufactured) {
    const auto mp = check_max_principle(traj);
    std::ostringstream d;
    if (!mp.passed) d << "step " << mp.fail_step << ", cell " << mp.fail_cell << ": " << mp.fail_what;
    check("max_principle", mp.passed, d.str());
  }
  if (!manufactured) {
    const double mean = mean_identity_defect(disc, traj.u, traj.phi);
    std::ostringstream d;
    d << "defect " << mean;
    check("mean_identity", mean <= 1e-10, d.str());
  }
  if (cfg.check_energy && !manufactured) {
    const auto en = energy_budget(disc, traj, scheme.linear);
    std::ostringstream d;
    d << "per-step " << verdict(en.steps_ok) << ", phi " << verdict(en.phi_ok) << ", summed "
      << verdict(en.summed_ok);
    check("energy", en.passed, d.str());
  }
  if (cfg.check_translates) {
    const double dt = scheme.dt;
    for (double tau : {0.5 * dt, dt, 3.7 * dt, scheme.final_time / 3.0}) {
      const auto ru = time_translate_sq(disc, traj.u, tau, NormKind::DirichletH1, scheme.linear);
      const auto rp = time_translate_sq(disc, traj.phi, tau, NormKind::L2, scheme.linear);
      std::ostringstream d;
      d << "tau " << tau << ": u " << ru.lhs << " <= " << ru.rhs << ", phi " << rp.lhs << " <= " << rp.rhs;
      check("time_translate", ru.passed && rp.passed, d.str());
    }
    const double h = disc.geometry().h;
    const std::size_t last = traj.u.num_intervals();
    for (const CellField* f : {&traj.u[last], &traj.phi[last]}) {
      const auto sr = space_translate_sq(disc, *f, {0.5 * h * 0.8, 0.5 * h * 0.6});
      std::ostringstream d;
      d << "lhs " << sr.lhs << ", neumann bound " << sr.bound_neumann << ", c_min " << sr.c_min;
      check("space_translate", sr.neumann_ok, d.str());
    }
  }
  if (cfg.check_chi) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t N = scheme.num_steps();
    bool ok = true;
    for (int i = 0; i < 100; ++i) {
      std::vector<double> alpha(N);
      for (double& a : alpha) a = 2.0 * unit(rng) - 1.0;
      const double tau = scheme.final_time * (0.001 + 0.998 * unit(rng));
      const auto c = chi_identities(N, scheme.dt, tau, alpha);
      ok = ok && c.integral_exact && c.window_bound_ok;
    }
    check("chi_identities", ok, "100 random tuples");
  }
  return finish();
}

int cmd_convergence(const RunConfig& cfg, std::ostream& log) {
  if (cfg.levels < 2) throw ConfigError("convergence needs at least two levels");
  if (cfg.u0 == InitialKind::Csv && !cfg.manufactured) {
    throw ConfigError("u0 = csv is tied to one mesh and cannot be used for a convergence study");
  }
  LevelSource source;
  switch (cfg.mesh_kind) {
    case MeshKind::Rectangle:
      source = [nx = cfg.nx, ny = cfg.ny, lx = cfg.lx, ly = cfg.ly](std::size_t m) {
        return rectangle_mesh(nx << m, ny << m, lx, ly);
      };
      break;
    case MeshKind::Equilateral:
      source = [nx = cfg.nx, ny = cfg.ny, edge = cfg.edge](std::size_t m) {
        return equilateral_mesh(nx << m, ny << m, edge / static_cast<double>(std::size_t{1} << m));
      };
      break;
    case MeshKind::File: source = refinement_levels(cfg.build_mesh()); break;
  }
  const Discretization base(source(0));
  const SchemeConfig scheme = cfg.scheme(base);
  ConvergenceOptions options;
  options.levels = cfg.levels;
  options.parallel_levels = cfg.parallel_levels;
  if (cfg.manufactured) options.exact = unit_square_manufactured().exact;
  const ConvergenceTable table = convergence_study(source, scheme, options);

  ensure_dir(cfg.output_dir);
  const auto path = cfg.output_dir / "convergence.csv";
  write_text(path, table.to_csv());
  log << table.to_csv() << std::setprecision(10) << "cauchy_strictly_decreasing: "
      << verdict(table.strictly_decreasing()) << '\n';
  if (table.cauchy.size() >= 2) log << "last_ratio_u: " << table.last_ratio_u() << '\n';
  if (table.manufactured) log << "order_u: " << table.order_u() << "\norder_phi: " << table.order_phi() << '\n';
  log << "wrote " << path.string() << '\n';
  return 0;
}

}  // namespace p1fv
