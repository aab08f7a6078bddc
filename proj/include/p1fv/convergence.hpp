#pragma once

// Refinement studies: Cauchy differences between consecutive levels and,
// for manufactured problems, errors against the exact solution.

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "p1fv/mesh.hpp"
#include "p1fv/scheme.hpp"

namespace p1fv {

/// Sparse overlay of two meshes of the same domain: every pair of cells with
/// a positive intersection area.
struct MeshOverlay {
  struct Piece {
    CellIndex coarse;
    CellIndex fine;
    double area;
  };
  std::vector<Piece> pieces;
  double total_area = 0.0;
};

MeshOverlay overlay_meshes(const Mesh& coarse, const Mesh& fine);

/// sum over pieces of area * (a_K - b_L)^2.
double overlay_l2_diff_sq(const MeshOverlay& overlay, std::span<const double> coarse, std::span<const double> fine);

/// Coarse field seen on the fine mesh: area-weighted average over each fine
/// cell. On nested meshes this is plain injection.
std::vector<double> transfer_to_fine(const MeshOverlay& overlay, std::span<const double> coarse,
                                     std::size_t num_fine_cells);

/// L2((0,T) x Omega) distance between two trajectories of the same final
/// time, with fine dt = coarse dt / 2. Both use the reconstruction
/// u(t) = u^{n+1} on (t^n, t^{n+1}].
double spacetime_l2_diff(const MeshOverlay& overlay, const SpaceTimeField& coarse, const SpaceTimeField& fine);

struct ExactSolution {
  SpaceTimeFunction u;
  SpaceTimeFunction phi;
  QuadratureRule rule = QuadratureRule::subdivision(2);
};

/// u = (1+t) x(1-x) y(1-y), phi = (1+t)(2 + cos(pi x) cos(pi y)) on the unit
/// square, with the matching sources.
struct ManufacturedProblem {
  ExactSolution exact;
  ManufacturedSources sources;
  InitialCondition u0;
};
ManufacturedProblem unit_square_manufactured();

/// L2((0,T) x Omega) distance between a trajectory and the cell averages of
/// the exact solution at t^{n+1}, n = 0..N-1.
double spacetime_l2_error(const Discretization& disc, const SpaceTimeField& f, const SpaceTimeFunction& exact,
                          const QuadratureRule& rule);

using LevelSource = std::function<Mesh(std::size_t level)>;

/// Strip generator with nx = ny = base * 2^level on [0, lx] x [0, ly].
LevelSource rectangle_levels(std::size_t base, double lx = 1.0, double ly = 1.0);
/// base, refine_uniform(base), ...
LevelSource refinement_levels(Mesh base);

struct ConvergenceLevel {
  std::size_t level = 0;
  std::size_t num_cells = 0;
  double h = 0.0;
  double dt = 0.0;
  std::size_t num_steps = 0;
  double seconds = 0.0;
  double error_u = 0.0;  ///< manufactured runs only
  double error_phi = 0.0;
};

struct CauchyRow {
  std::size_t level = 0;  ///< difference between `level` and `level + 1`
  double diff_u = 0.0;
  double diff_phi = 0.0;
  double ratio_u = 0.0;  ///< diff_u / previous diff_u, 0 for the first row
  double ratio_phi = 0.0;
};

struct ConvergenceTable {
  std::vector<ConvergenceLevel> levels;
  std::vector<CauchyRow> cauchy;
  bool manufactured = false;

  /// Cauchy differences of u strictly decreasing.
  bool strictly_decreasing() const;
  double last_ratio_u() const;
  /// log2(error_{m-1} / error_m) over the last two levels.
  double order_u() const;
  double order_phi() const;
  /// One row per level: level,cells,h,dt,steps,seconds,diff_u,diff_phi,ratio_u,ratio_phi,error_u,error_phi.
  std::string to_csv() const;
};

struct ConvergenceOptions {
  std::size_t levels = 4;
  /// Runs levels on separate threads; results are identical to serial runs.
  bool parallel_levels = false;
  std::optional<ExactSolution> exact;
};

/// Level m uses mesh source(m) and dt = cfg.dt / 2^m. Throws ConfigError for
/// fewer than two levels; run failures propagate.
ConvergenceTable convergence_study(const LevelSource& source, const SchemeConfig& cfg,
                                   const ConvergenceOptions& options);

/// Nested uniform refinement of base_mesh.
ConvergenceTable convergence_study(const Mesh& base_mesh, const SchemeConfig& cfg, std::size_t levels);

}  // namespace p1fv
