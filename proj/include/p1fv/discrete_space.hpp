#pragma once

// Inner products and norms on piecewise-constant fields, single-time and
// space-time.

#include <functional>

#include "p1fv/field.hpp"
#include "p1fv/linalg.hpp"
#include "p1fv/operators.hpp"

namespace p1fv {

/// [u, v]: internal faces tau (u_L - u_K)(v_L - v_K) plus boundary faces
/// tau u_K v_K. Evaluated face by face, independently of the matrices.
double inner_dirichlet(const Discretization& disc, const CellField& u, const CellField& v);
/// <u, v>: internal-face part of inner_dirichlet.
double inner_neumann(const Discretization& disc, const CellField& u, const CellField& v);

double norm_1M(const Discretization& disc, const CellField& u);
double seminorm_1M(const Discretization& disc, const CellField& u);
double l2_inner(const Discretization& disc, const CellField& u, const CellField& v);
double l2_norm(const Discretization& disc, const CellField& u);
double linf_norm(const CellField& u);

/// sup_v (u, v)_{L2} / norm_1M(v), via the Riesz representative w solving
/// A_D w = mass u; returns norm_1M(w).
double dual_norm_minus1(const Discretization& disc, const CellField& u, const SolverConfig& cfg = {});

using PointFunction = std::function<double(Point2)>;

struct QuadratureRule {
  enum class Kind {
    EdgeMidpoint,  ///< 3 edge midpoints, exact up to degree 2
    Subdivision,   ///< 4^levels congruent children, centroid rule on each
  };
  Kind kind = Kind::EdgeMidpoint;
  int levels = 3;

  static QuadratureRule edge_midpoint() { return {}; }
  static QuadratureRule subdivision(int levels) { return {Kind::Subdivision, levels}; }
};

/// Visits every (point, weight) of the rule on cell k; weights sum to |K|.
void for_each_quadrature_point(const Mesh& mesh, CellIndex k, const QuadratureRule& rule,
                               const std::function<void(Point2, double)>& visit);

/// Cell averages (1/|K|) int_K f. Throws Error on non-finite results.
CellField project_initial(const Discretization& disc, const PointFunction& f,
                          const QuadratureRule& rule = {});

/// Smallest value of f over all quadrature points of the rule.
double min_at_quadrature_points(const Discretization& disc, const PointFunction& f,
                                const QuadratureRule& rule = {});

struct SpaceTimeNorms {
  double l2_l2 = 0.0;             ///< (dt sum_{n=0..N} ||f^n||_{L2}^2)^{1/2}
  double l2_h1 = 0.0;             ///< (dt sum_{n=0..N} ||f^n||_{1,M}^2)^{1/2}
  double l2_h1_semi = 0.0;        ///< (dt sum_{n=0..N} |f^n|_{1,M}^2)^{1/2}
  double l2_hminus1_of_dt = 0.0;  ///< (dt sum_{n=0..N-1} ||d_t f^n||_{-1,M}^2)^{1/2}
  double l2_l2_of_dt = 0.0;       ///< (dt sum_{n=0..N-1} ||d_t f^n||_{L2}^2)^{1/2}
  double linf_l2 = 0.0;           ///< max_{n=0..N} ||f^n||_{L2}
};

/// The H1-type sums run over n = 0..N, as the norms are defined for the
/// scheme (N+1 terms, i.e. one dt more than the length of (0,T)).
SpaceTimeNorms spacetime_norms(const Discretization& disc, const SpaceTimeField& f,
                               const SolverConfig& cfg = {});

/// (f^{n+1} - f^n) / dt.
CellField time_difference(const SpaceTimeField& f, std::size_t n);

}  // namespace p1fv
