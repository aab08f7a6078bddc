#pragma once

// Fractional-step time integrator: implicit nonlinear temperature step with
// lagged intensity, then a linear intensity step with the new temperature.

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "p1fv/discrete_space.hpp"
#include "p1fv/field.hpp"
#include "p1fv/linalg.hpp"
#include "p1fv/operators.hpp"

namespace p1fv {

struct InitialCondition {
  enum class Kind { Constant, Function, CellValues };
  Kind kind = Kind::Constant;
  double constant = 0.0;
  PointFunction function;
  std::vector<double> cell_values;
  QuadratureRule rule = QuadratureRule::edge_midpoint();

  static InitialCondition uniform(double c) { return {Kind::Constant, c, {}, {}, {}}; }
  static InitialCondition from_function(PointFunction f, QuadratureRule rule = QuadratureRule::edge_midpoint()) {
    return {Kind::Function, 0.0, std::move(f), {}, rule};
  }
  static InitialCondition from_cells(std::vector<double> values) {
    return {Kind::CellValues, 0.0, {}, std::move(values), {}};
  }
};

/// max(0, 1 - 4 |x - c|^2 / r^2) centered on the mesh bounding box, with r
/// a quarter of its smaller extent.
PointFunction bump_profile(const Mesh& mesh);
/// The bump with a subdivision rule, since its support edge is not smooth.
InitialCondition bump_initial(const Mesh& mesh);

using SpaceTimeFunction = std::function<double(Point2, double)>;

/// Extra right-hand sides for manufactured-solution studies. Cell averages
/// at the new time level are added to the temperature and intensity
/// equations. Disables the hard positivity checks.
struct ManufacturedSources {
  SpaceTimeFunction f_u;
  SpaceTimeFunction f_phi;
  QuadratureRule rule = QuadratureRule::subdivision(2);
};

enum class NonlinearSolver { Newton, Picard };

struct SchemeConfig {
  double dt = 0.01;
  double final_time = 0.5;
  double newton_tol = 1e-12;
  std::size_t newton_max_iter = 50;
  NonlinearSolver nonlinear_solver = NonlinearSolver::Newton;
  InitialCondition u0 = InitialCondition::uniform(0.0);
  SolverConfig linear;  ///< intensity solves
  /// Relative tolerance of the Newton/Picard correction solves; the outer
  /// residual test governs the final accuracy.
  double correction_rel_tol = 1e-10;
  std::optional<ManufacturedSources> sources;
  /// Run analyze_structure on every Newton/Picard matrix.
  bool check_jacobian_structure = false;

  /// Throws ConfigError on non-positive dt/T/tolerances or T/dt not integral.
  void validate() const;
  std::size_t num_steps() const { return step_count(dt, final_time); }
};

struct State {
  CellField u;
  CellField phi;
  double t = 0.0;
  std::size_t n = 0;
  double u_bar0 = 0.0;  ///< max of the initial temperature, fixes residual scaling
};

struct StepStats {
  std::size_t nonlinear_iterations = 0;
  double nonlinear_residual = 0.0;  ///< scaled residual at acceptance
  std::size_t damped_steps = 0;
  std::size_t linear_iterations = 0;
  std::size_t clamped_u = 0;
  std::size_t clamped_phi = 0;
  std::size_t structure_checks = 0;
  bool structure_ok = true;
};

struct Trajectory {
  SpaceTimeField u;
  SpaceTimeField phi;
  std::vector<StepStats> stats;  ///< stats[0] describes init, stats[n] step n-1 -> n
  double u_bar0 = 0.0;
};

/// u^0 = cell averages of u0, phi^0 from the intensity equation.
/// Throws ConfigError if u0 is negative somewhere (quadrature points for
/// functions), SolverError on linear failure.
State init_state(const Discretization& disc, const SchemeConfig& cfg, StepStats* stats = nullptr);

/// Solves the temperature equation for u^{n+1}. Throws NonlinearSolverError
/// and, without sources, MaxPrincipleViolation.
CellField advance_u(const Discretization& disc, const State& state, const SchemeConfig& cfg,
                    StepStats* stats = nullptr);

/// Solves (mass + A_N) phi = mass (u^4 + f_phi(t)). `guess` seeds CG.
CellField advance_phi(const Discretization& disc, const CellField& u, double t, const SchemeConfig& cfg,
                      const CellField* guess = nullptr, StepStats* stats = nullptr);

State step(const Discretization& disc, const State& state, const SchemeConfig& cfg, StepStats* stats = nullptr);

Trajectory run(const Discretization& disc, const SchemeConfig& cfg);

/// Residual of the temperature equation per unit area, divided by
/// (1/dt + u_bar0^3): the quantity compared against newton_tol.
std::vector<double> scaled_residual(const Discretization& disc, const State& state, const SchemeConfig& cfg,
                                    std::span<const double> u_new);

}  // namespace p1fv
