#include "p1fv/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "p1fv/error.hpp"

namespace p1fv {

namespace {

constexpr double kClampRelTol = 1e-13;
constexpr double kUpperRelTol = 1e-10;
constexpr int kMaxHalvings = 30;
// Iterations continue towards this fraction of newton_tol while the residual
// still drops by half, so stopping errors do not pile up over many steps.
constexpr double kInnerFactor = 1e-2;

bool keep_iterating(double rn, double prev, std::size_t it, const SchemeConfig& cfg) {
  if (rn <= kInnerFactor * cfg.newton_tol || it == cfg.newton_max_iter) return false;
  return rn > cfg.newton_tol || rn < 0.5 * prev;
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

std::vector<double> source_average(const Discretization& disc, const SpaceTimeFunction& f, double t,
                                   const QuadratureRule& rule) {
  const CellField avg = project_initial(disc, [&](Point2 p) { return f(p, t); }, rule);
  return {avg.values().begin(), avg.values().end()};
}

/// Sets entries in [-1e-13 ||x||_inf, 0) to zero. Larger negative entries
/// raise MaxPrincipleViolation when `strict`, and are kept otherwise.
std::size_t clamp_roundoff(std::vector<double>& x, bool strict, const char* name, std::size_t step) {
  const double floor = -kClampRelTol * max_abs(x);
  std::size_t count = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] >= 0.0) continue;
    if (x[k] >= floor) {
      x[k] = 0.0;
      ++count;
    } else if (strict) {
      std::ostringstream msg;
      msg.precision(17);
      msg << name << " negative at step " << step << ", cell " << k << ": " << x[k];
      throw MaxPrincipleViolation(msg.str());
    }
  }
  return count;
}

struct TemperatureProblem {
  const Discretization& disc;
  const State& state;
  double dt;
  double scale;
  std::vector<double> source;  ///< per unit area, zero without sources

  TemperatureProblem(const Discretization& d, const State& s, const SchemeConfig& cfg)
      : disc(d), state(s), dt(cfg.dt), scale(1.0 / cfg.dt + s.u_bar0 * s.u_bar0 * s.u_bar0),
        source(d.num_cells(), 0.0) {
    if (cfg.sources && cfg.sources->f_u) {
      source = source_average(d, cfg.sources->f_u, static_cast<double>(s.n + 1) * cfg.dt, cfg.sources->rule);
    }
  }

  /// Unscaled per-unit-area residual.
  void residual(std::span<const double> u, std::vector<double>& res) const {
    const auto& mass = disc.laplacians().mass;
    disc.laplacians().dirichlet.multiply(u, res);
    const auto un = state.u.values();
    const auto phin = state.phi.values();
    for (std::size_t k = 0; k < res.size(); ++k) {
      const double uk = u[k];
      res[k] = (uk - un[k]) / dt + res[k] / mass[k] + std::abs(uk) * uk * uk * uk - phin[k] - source[k];
    }
  }

  double scaled_norm(std::span<const double> res) const { return max_abs(res) / scale; }
};

void check_structure(const SparseSpdMatrix& a, std::span<const double> shift, StepStats* stats) {
  if (!stats) return;
  ++stats->structure_checks;
  if (!analyze_structure(a, shift).is_m_matrix()) stats->structure_ok = false;
}

[[noreturn]] void throw_not_converged(const char* method, std::size_t step, std::size_t iters, double res,
                                      double tol) {
  std::ostringstream msg;
  msg << method << " did not converge at step " << step << " after " << iters << " iterations: scaled residual "
      << res << " > " << tol;
  throw NonlinearSolverError(msg.str());
}

std::vector<double> solve_newton(const TemperatureProblem& p, const SchemeConfig& cfg, StepStats* stats) {
  const auto& a = p.disc.laplacians().dirichlet;
  const auto& mass = p.disc.laplacians().mass;
  const std::size_t n = mass.size();
  SolverConfig correction = cfg.linear;
  correction.rel_tol = cfg.correction_rel_tol;
  std::vector<double> u(p.state.u.values().begin(), p.state.u.values().end());
  std::vector<double> res(n), trial(n), trial_res(n), shift(n), rhs(n);
  p.residual(u, res);
  double rn = p.scaled_norm(res);
  double prev = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  while (keep_iterating(rn, prev, it, cfg)) {
    ++it;
    prev = rn;
    for (std::size_t k = 0; k < n; ++k) {
      shift[k] = mass[k] * (1.0 / p.dt + 4.0 * std::abs(u[k]) * u[k] * u[k]);
      rhs[k] = -mass[k] * res[k];
    }
    if (cfg.check_jacobian_structure) check_structure(a, shift, stats);
    const SolveResult lin = solve_spd(a, rhs, correction, shift);
    if (stats) stats->linear_iterations += lin.iterations;
    double lambda = 1.0;
    double rt = 0.0;
    for (int halvings = 0;; ++halvings) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = u[k] + lambda * lin.x[k];
      p.residual(trial, trial_res);
      rt = p.scaled_norm(trial_res);
      if (rt <= rn || halvings == kMaxHalvings) break;
      lambda *= 0.5;
      if (stats) ++stats->damped_steps;
    }
    u.swap(trial);
    res.swap(trial_res);
    rn = rt;
  }
  if (rn > cfg.newton_tol) throw_not_converged("Newton", p.state.n, it, rn, cfg.newton_tol);
  if (stats) {
    stats->nonlinear_iterations = it;
    stats->nonlinear_residual = rn;
  }
  return u;
}

/// Fixed point of [mass/dt + mass |u_k| u_k^2 + A_D] u_{k+1} = mass (u^n/dt +
/// phi^n + f_u), solved for the increment u_{k+1} - u_k so the linear
/// tolerance applies to the correction rather than to the full state.
std::vector<double> solve_picard(const TemperatureProblem& p, const SchemeConfig& cfg, StepStats* stats) {
  const auto& a = p.disc.laplacians().dirichlet;
  const auto& mass = p.disc.laplacians().mass;
  const std::size_t n = mass.size();
  SolverConfig correction = cfg.linear;
  correction.rel_tol = cfg.correction_rel_tol;
  std::vector<double> u(p.state.u.values().begin(), p.state.u.values().end());
  std::vector<double> res(n), shift(n), rhs(n);
  p.residual(u, res);
  double rn = p.scaled_norm(res);
  double prev = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  while (keep_iterating(rn, prev, it, cfg)) {
    ++it;
    prev = rn;
    for (std::size_t k = 0; k < n; ++k) {
      shift[k] = mass[k] * (1.0 / p.dt + std::abs(u[k]) * u[k] * u[k]);
      rhs[k] = -mass[k] * res[k];
    }
    if (cfg.check_jacobian_structure) check_structure(a, shift, stats);
    const SolveResult lin = solve_spd(a, rhs, correction, shift);
    if (stats) stats->linear_iterations += lin.iterations;
    for (std::size_t k = 0; k < n; ++k) u[k] += lin.x[k];
    p.residual(u, res);
    rn = p.scaled_norm(res);
  }
  if (rn > cfg.newton_tol) throw_not_converged("Picard", p.state.n, it, rn, cfg.newton_tol);
  if (stats) {
    stats->nonlinear_iterations = it;
    stats->nonlinear_residual = rn;
  }
  return u;
}

}  // namespace

PointFunction bump_profile(const Mesh& mesh) {
  double x0 = std::numeric_limits<double>::infinity(), y0 = x0, x1 = -x0, y1 = -x0;
  for (const Point2& p : mesh.vertices()) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  const Point2 c{0.5 * (x0 + x1), 0.5 * (y0 + y1)};
  const double r = 0.25 * std::min(x1 - x0, y1 - y0);
  return [c, r](Point2 p) {
    const double d2 = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
    return std::max(0.0, 1.0 - 4.0 * d2 / (r * r));
  };
}

InitialCondition bump_initial(const Mesh& mesh) {
  return InitialCondition::from_function(bump_profile(mesh), QuadratureRule::subdivision(3));
}

void SchemeConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be positive");
  if (!(final_time > 0.0) || !std::isfinite(final_time)) throw ConfigError("T must be positive");
  if (!(newton_tol > 0.0)) throw ConfigError("newton_tol must be positive");
  if (!(correction_rel_tol > 0.0) || !(correction_rel_tol < 1.0)) {
    throw ConfigError("correction_rel_tol must lie in (0, 1)");
  }
  if (newton_max_iter == 0) throw ConfigError("newton_max_iter must be positive");
  linear.validate();
  step_count(dt, final_time);
}

State init_state(const Discretization& disc, const SchemeConfig& cfg, StepStats* stats) {
  const std::size_t n = disc.num_cells();
  std::vector<double> u0;
  switch (cfg.u0.kind) {
    case InitialCondition::Kind::Constant:
      if (!(cfg.u0.constant >= 0.0)) throw ConfigError("initial temperature u0 must be nonnegative");
      u0.assign(n, cfg.u0.constant);
      break;
    case InitialCondition::Kind::Function: {
      if (!cfg.u0.function) throw ConfigError("initial temperature function is empty");
      const double lo = min_at_quadrature_points(disc, cfg.u0.function, cfg.u0.rule);
      if (!(lo >= 0.0)) {
        std::ostringstream msg;
        msg << "initial temperature u0 must be nonnegative (minimum " << lo << " at a quadrature point)";
        throw ConfigError(msg.str());
      }
      const CellField avg = project_initial(disc, cfg.u0.function, cfg.u0.rule);
      u0.assign(avg.values().begin(), avg.values().end());
      break;
    }
    case InitialCondition::Kind::CellValues:
      if (cfg.u0.cell_values.size() != n) throw MeshMismatchError("initial cell values do not match the mesh");
      for (std::size_t k = 0; k < n; ++k) {
        if (!(cfg.u0.cell_values[k] >= 0.0)) {
          std::ostringstream msg;
          msg << "initial temperature u0 must be nonnegative (cell " << k << ")";
          throw ConfigError(msg.str());
        }
      }
      u0 = cfg.u0.cell_values;
      break;
  }
  CellField u = disc.field(std::move(u0));
  const double u_bar0 = u.max();
  CellField phi = advance_phi(disc, u, 0.0, cfg, nullptr, stats);
  return State{std::move(u), std::move(phi), 0.0, 0, u_bar0};
}

std::vector<double> scaled_residual(const Discretization& disc, const State& state, const SchemeConfig& cfg,
                                    std::span<const double> u_new) {
  disc.require_owns(state.u);
  if (u_new.size() != disc.num_cells()) throw MeshMismatchError("scaled_residual: size mismatch");
  const TemperatureProblem p(disc, state, cfg);
  std::vector<double> res(u_new.size());
  p.residual(u_new, res);
  for (double& r : res) r /= p.scale;
  return res;
}

CellField advance_u(const Discretization& disc, const State& state, const SchemeConfig& cfg, StepStats* stats) {
  disc.require_owns(state.u);
  disc.require_owns(state.phi);
  const TemperatureProblem p(disc, state, cfg);
  std::vector<double> u = cfg.nonlinear_solver == NonlinearSolver::Newton ? solve_newton(p, cfg, stats)
                                                                          : solve_picard(p, cfg, stats);
  const bool strict = !cfg.sources.has_value();
  const std::size_t clamped = clamp_roundoff(u, strict, "temperature", state.n + 1);
  if (stats) stats->clamped_u += clamped;
  if (strict) {
    const double bound = state.u.max() * (1.0 + kUpperRelTol);
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (u[k] > bound) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "temperature exceeds the previous maximum at step " << state.n + 1 << ", cell " << k << ": " << u[k]
            << " > " << state.u.max();
        throw MaxPrincipleViolation(msg.str());
      }
    }
  }
  return disc.field(std::move(u));
}

CellField advance_phi(const Discretization& disc, const CellField& u, double t, const SchemeConfig& cfg,
                      const CellField* guess, StepStats* stats) {
  disc.require_owns(u);
  const auto& a = disc.laplacians().neumann;
  const auto& mass = disc.laplacians().mass;
  const std::size_t n = mass.size();
  std::vector<double> rhs(n);
  for (std::size_t k = 0; k < n; ++k) rhs[k] = mass[k] * u[k] * u[k] * u[k] * u[k];
  if (cfg.sources && cfg.sources->f_phi) {
    const auto src = source_average(disc, cfg.sources->f_phi, t, cfg.sources->rule);
    for (std::size_t k = 0; k < n; ++k) rhs[k] += mass[k] * src[k];
  }
  if (std::all_of(rhs.begin(), rhs.end(), [](double x) { return x == 0.0; })) return disc.field(std::vector<double>(n, 0.0));

  std::span<const double> x0;
  if (guess) {
    disc.require_owns(*guess);
    x0 = guess->values();
  }
  SolveResult lin = solve_spd(a, rhs, cfg.linear, mass, x0);
  if (stats) stats->linear_iterations += lin.iterations;
  std::vector<double> phi = std::move(lin.x);

  // Constants lie in the kernel of A_N, so a uniform shift removes the
  // residual's mean and makes the integral balance hold to roundoff.
  std::vector<double> r(n);
  a.multiply(phi, r, mass);
  double r_sum = 0.0;
  double m_sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    r_sum += rhs[k] - r[k];
    m_sum += mass[k];
  }
  const double c = r_sum / m_sum;
  for (double& v : phi) v += c;

  const bool strict = !cfg.sources.has_value();
  const auto step = static_cast<std::size_t>(std::llround(t / cfg.dt));
  const std::size_t clamped = clamp_roundoff(phi, strict, "intensity", step);
  if (stats) stats->clamped_phi += clamped;
  return disc.field(std::move(phi));
}

State step(const Discretization& disc, const State& state, const SchemeConfig& cfg, StepStats* stats) {
  CellField u = advance_u(disc, state, cfg, stats);
  const double t = static_cast<double>(state.n + 1) * cfg.dt;
  CellField phi = advance_phi(disc, u, t, cfg, &state.phi, stats);
  return State{std::move(u), std::move(phi), t, state.n + 1, state.u_bar0};
}

Trajectory run(const Discretization& disc, const SchemeConfig& cfg) {
  cfg.validate();
  const std::size_t steps = cfg.num_steps();
  std::vector<StepStats> stats(steps + 1);
  State s = init_state(disc, cfg, &stats[0]);
  std::vector<CellField> us{s.u};
  std::vector<CellField> phis{s.phi};
  us.reserve(steps + 1);
  phis.reserve(steps + 1);
  for (std::size_t n = 0; n < steps; ++n) {
    s = step(disc, s, cfg, &stats[n + 1]);
    us.push_back(s.u);
    phis.push_back(s.phi);
  }
  return Trajectory{SpaceTimeField(std::move(us), cfg.dt, cfg.final_time),
                    SpaceTimeField(std::move(phis), cfg.dt, cfg.final_time), std::move(stats), s.u_bar0};
}

}  // namespace p1fv
