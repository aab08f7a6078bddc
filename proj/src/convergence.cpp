#include "p1fv/convergence.hpp"

#include <chrono>
#include <cmath>
#include <future>
#include <memory>
#include <mutex>
#include <limits>
#include <numbers>
#include <sstream>

#include "p1fv/error.hpp"

namespace p1fv {

MeshOverlay overlay_meshes(const Mesh& coarse, const Mesh& fine) {
  const CellLocator locator(coarse);
  MeshOverlay overlay;
  for (CellIndex l = 0; l < fine.num_cells(); ++l) {
    const Triangle t = fine.cell_triangle(l);
    const Point2 lo{std::min({t[0].x, t[1].x, t[2].x}), std::min({t[0].y, t[1].y, t[2].y})};
    const Point2 hi{std::max({t[0].x, t[1].x, t[2].x}), std::max({t[0].y, t[1].y, t[2].y})};
    for (CellIndex k : locator.candidates(lo, hi)) {
      const double area = triangle_overlap_area(coarse.cell_triangle(k), t);
      if (area > 0.0) {
        overlay.pieces.push_back({k, l, area});
        overlay.total_area += area;
      }
    }
  }
  return overlay;
}

double overlay_l2_diff_sq(const MeshOverlay& overlay, std::span<const double> coarse, std::span<const double> fine) {
  double s = 0.0;
  for (const auto& p : overlay.pieces) {
    const double d = coarse[p.coarse] - fine[p.fine];
    s += p.area * d * d;
  }
  return s;
}

std::vector<double> transfer_to_fine(const MeshOverlay& overlay, std::span<const double> coarse,
                                     std::size_t num_fine_cells) {
  std::vector<double> value(num_fine_cells, 0.0), area(num_fine_cells, 0.0);
  for (const auto& p : overlay.pieces) {
    value[p.fine] += p.area * coarse[p.coarse];
    area[p.fine] += p.area;
  }
  for (std::size_t l = 0; l < num_fine_cells; ++l) {
    if (area[l] > 0.0) value[l] /= area[l];
  }
  return value;
}

double spacetime_l2_diff(const MeshOverlay& overlay, const SpaceTimeField& coarse, const SpaceTimeField& fine) {
  const std::size_t nc = coarse.num_intervals();
  if (fine.num_intervals() != 2 * nc) throw MeshMismatchError("fine trajectory must have twice the coarse steps");
  double s = 0.0;
  for (std::size_t i = 0; i < fine.num_intervals(); ++i) {
    s += fine.dt() * overlay_l2_diff_sq(overlay, coarse[i / 2 + 1].values(), fine[i + 1].values());
  }
  return std::sqrt(s);
}

ManufacturedProblem unit_square_manufactured() {
  using std::numbers::pi;
  auto g = [](Point2 p) { return p.x * (1.0 - p.x) * p.y * (1.0 - p.y); };
  auto c = [](Point2 p) { return std::cos(pi * p.x) * std::cos(pi * p.y); };
  ManufacturedProblem m;
  m.exact.u = [g](Point2 p, double t) { return (1.0 + t) * g(p); };
  m.exact.phi = [c](Point2 p, double t) { return (1.0 + t) * (2.0 + c(p)); };
  m.sources.f_u = [g, c](Point2 p, double t) {
    const double u = (1.0 + t) * g(p);
    const double lap = -2.0 * (1.0 + t) * (p.y * (1.0 - p.y) + p.x * (1.0 - p.x));
    const double phi = (1.0 + t) * (2.0 + c(p));
    return g(p) - lap + u * u * u * u - phi;
  };
  m.sources.f_phi = [g, c](Point2 p, double t) {
    const double u = (1.0 + t) * g(p);
    return (1.0 + t) * (2.0 + c(p) + 2.0 * pi * pi * c(p)) - u * u * u * u;
  };
  m.u0 = InitialCondition::from_function(g);
  return m;
}

double spacetime_l2_error(const Discretization& disc, const SpaceTimeField& f, const SpaceTimeFunction& exact,
                          const QuadratureRule& rule) {
  disc.require_owns(f[0]);
  const auto& vol = disc.geometry().cell_volume;
  double s = 0.0;
  for (std::size_t n = 0; n < f.num_intervals(); ++n) {
    const double t = static_cast<double>(n + 1) * f.dt();
    const CellField avg = project_initial(disc, [&](Point2 p) { return exact(p, t); }, rule);
    for (std::size_t k = 0; k < vol.size(); ++k) {
      const double d = f[n + 1][k] - avg[k];
      s += f.dt() * vol[k] * d * d;
    }
  }
  return std::sqrt(s);
}

LevelSource rectangle_levels(std::size_t base, double lx, double ly) {
  return [=](std::size_t level) {
    const std::size_t n = base << level;
    return rectangle_mesh(n, n, lx, ly);
  };
}

LevelSource refinement_levels(Mesh base) {
  auto meshes = std::make_shared<std::vector<Mesh>>();
  meshes->push_back(std::move(base));
  auto lock = std::make_shared<std::mutex>();
  return [meshes, lock](std::size_t level) {
    std::lock_guard<std::mutex> guard(*lock);
    while (meshes->size() <= level) meshes->push_back(refine_uniform(meshes->back()));
    return (*meshes)[level];
  };
}

namespace {

struct LevelRun {
  std::shared_ptr<const Discretization> disc;
  Trajectory traj;
  ConvergenceLevel info;
};

LevelRun run_level(const LevelSource& source, const SchemeConfig& base, std::size_t m,
                   const std::optional<ExactSolution>& exact) {
  const auto start = std::chrono::steady_clock::now();
  auto disc = std::make_shared<const Discretization>(source(m));
  SchemeConfig cfg = base;
  cfg.dt = base.dt / static_cast<double>(std::size_t{1} << m);
  LevelRun out{disc, run(*disc, cfg), {}};
  out.info.level = m;
  out.info.num_cells = out.disc->num_cells();
  out.info.h = out.disc->geometry().h;
  out.info.dt = cfg.dt;
  out.info.num_steps = cfg.num_steps();
  if (exact) {
    out.info.error_u = spacetime_l2_error(*out.disc, out.traj.u, exact->u, exact->rule);
    out.info.error_phi = spacetime_l2_error(*out.disc, out.traj.phi, exact->phi, exact->rule);
  }
  out.info.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

ConvergenceTable convergence_study(const LevelSource& source, const SchemeConfig& cfg,
                                   const ConvergenceOptions& options) {
  if (options.levels < 2) throw ConfigError("convergence study needs at least two levels");
  cfg.validate();

  std::vector<LevelRun> runs;
  runs.reserve(options.levels);
  if (options.parallel_levels) {
    std::vector<std::future<LevelRun>> jobs;
    for (std::size_t m = 0; m < options.levels; ++m) {
      jobs.push_back(std::async(std::launch::async, run_level, std::cref(source), std::cref(cfg), m,
                                std::cref(options.exact)));
    }
    for (std::size_t m = 0; m < options.levels; ++m) runs.push_back(jobs[m].get());
  } else {
    for (std::size_t m = 0; m < options.levels; ++m) runs.push_back(run_level(source, cfg, m, options.exact));
  }

  ConvergenceTable table;
  table.manufactured = options.exact.has_value();
  for (const auto& r : runs) table.levels.push_back(r.info);
  for (std::size_t m = 0; m + 1 < runs.size(); ++m) {
    const MeshOverlay overlay = overlay_meshes(runs[m].disc->mesh(), runs[m + 1].disc->mesh());
    CauchyRow row;
    row.level = m;
    row.diff_u = spacetime_l2_diff(overlay, runs[m].traj.u, runs[m + 1].traj.u);
    row.diff_phi = spacetime_l2_diff(overlay, runs[m].traj.phi, runs[m + 1].traj.phi);
    if (m > 0) {
      const CauchyRow& prev = table.cauchy.back();
      row.ratio_u = prev.diff_u > 0.0 ? row.diff_u / prev.diff_u : 0.0;
      row.ratio_phi = prev.diff_phi > 0.0 ? row.diff_phi / prev.diff_phi : 0.0;
    }
    table.cauchy.push_back(row);
  }
  return table;
}

ConvergenceTable convergence_study(const Mesh& base_mesh, const SchemeConfig& cfg, std::size_t levels) {
  ConvergenceOptions options;
  options.levels = levels;
  return convergence_study(refinement_levels(base_mesh), cfg, options);
}

bool ConvergenceTable::strictly_decreasing() const {
  for (std::size_t i = 1; i < cauchy.size(); ++i) {
    if (!(cauchy[i].diff_u < cauchy[i - 1].diff_u)) return false;
  }
  return true;
}

double ConvergenceTable::last_ratio_u() const { return cauchy.size() < 2 ? 0.0 : cauchy.back().ratio_u; }

namespace {

double order(double coarse, double fine) {
  if (!(coarse > 0.0) || !(fine > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return std::log2(coarse / fine);
}

}  // namespace

double ConvergenceTable::order_u() const {
  if (levels.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return order(levels[levels.size() - 2].error_u, levels.back().error_u);
}

double ConvergenceTable::order_phi() const {
  if (levels.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return order(levels[levels.size() - 2].error_phi, levels.back().error_phi);
}

std::string ConvergenceTable::to_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "level,cells,h,dt,steps,seconds,diff_u,diff_phi,ratio_u,ratio_phi,error_u,error_phi\n";
  for (std::size_t m = 0; m < levels.size(); ++m) {
    const auto& l = levels[m];
    out << l.level << ',' << l.num_cells << ',' << l.h << ',' << l.dt << ',' << l.num_steps << ',' << l.seconds;
    if (m < cauchy.size()) {
      const auto& c = cauchy[m];
      out << ',' << c.diff_u << ',' << c.diff_phi << ',' << c.ratio_u << ',' << c.ratio_phi;
    } else {
      out << ",,,,";
    }
    if (manufactured) {
      out << ',' << l.error_u << ',' << l.error_phi;
    } else {
      out << ",,";
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace p1fv
