#include "p1fv/discrete_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "p1fv/error.hpp"

namespace p1fv {

namespace {

void require_pair(const Discretization& disc, const CellField& u, const CellField& v) {
  disc.require_owns(u);
  disc.require_owns(v);
}

double face_inner(const Discretization& disc, const CellField& u, const CellField& v, bool with_boundary) {
  require_pair(disc, u, v);
  const auto& faces = disc.mesh().faces();
  const auto& tau = disc.geometry().transmissibility;
  double sum = 0.0;
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const Face& face = faces[f];
    if (face.is_boundary()) {
      if (with_boundary) sum += tau[f] * u[face.inner] * v[face.inner];
    } else {
      sum += tau[f] * (u[face.outer] - u[face.inner]) * (v[face.outer] - v[face.inner]);
    }
  }
  return sum;
}

void subdivide(const Triangle& t, int levels, double weight, const std::function<void(Point2, double)>& visit) {
  if (levels == 0) {
    visit(Point2{(t[0].x + t[1].x + t[2].x) / 3.0, (t[0].y + t[1].y + t[2].y) / 3.0}, weight);
    return;
  }
  const Point2 m01 = midpoint(t[0], t[1]);
  const Point2 m12 = midpoint(t[1], t[2]);
  const Point2 m20 = midpoint(t[2], t[0]);
  const double w = 0.25 * weight;
  subdivide({t[0], m01, m20}, levels - 1, w, visit);
  subdivide({m01, t[1], m12}, levels - 1, w, visit);
  subdivide({m20, m12, t[2]}, levels - 1, w, visit);
  subdivide({m01, m12, m20}, levels - 1, w, visit);
}

}  // namespace

double inner_dirichlet(const Discretization& disc, const CellField& u, const CellField& v) {
  return face_inner(disc, u, v, true);
}

double inner_neumann(const Discretization& disc, const CellField& u, const CellField& v) {
  return face_inner(disc, u, v, false);
}

double norm_1M(const Discretization& disc, const CellField& u) {
  return std::sqrt(std::max(0.0, inner_dirichlet(disc, u, u)));
}

double seminorm_1M(const Discretization& disc, const CellField& u) {
  return std::sqrt(std::max(0.0, inner_neumann(disc, u, u)));
}

double l2_inner(const Discretization& disc, const CellField& u, const CellField& v) {
  require_pair(disc, u, v);
  const auto& vol = disc.geometry().cell_volume;
  double sum = 0.0;
  for (std::size_t k = 0; k < vol.size(); ++k) sum += vol[k] * u[k] * v[k];
  return sum;
}

double l2_norm(const Discretization& disc, const CellField& u) { return std::sqrt(l2_inner(disc, u, u)); }

double linf_norm(const CellField& u) {
  double m = 0.0;
  for (double x : u.values()) m = std::max(m, std::abs(x));
  return m;
}

double dual_norm_minus1(const Discretization& disc, const CellField& u, const SolverConfig& cfg) {
  disc.require_owns(u);
  const auto& mass = disc.laplacians().mass;
  std::vector<double> rhs(u.size());
  for (std::size_t k = 0; k < rhs.size(); ++k) rhs[k] = mass[k] * u[k];
  if (std::all_of(rhs.begin(), rhs.end(), [](double x) { return x == 0.0; })) return 0.0;
  const auto w = solve_spd(disc.laplacians().dirichlet, rhs, cfg).x;
  // ||w||_{1,M}^2 = w^T A_D w = w^T mass u.
  double sq = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sq += w[k] * rhs[k];
  return std::sqrt(std::max(0.0, sq));
}

void for_each_quadrature_point(const Mesh& mesh, CellIndex k, const QuadratureRule& rule,
                               const std::function<void(Point2, double)>& visit) {
  const Triangle t = mesh.cell_triangle(k);
  const double area = triangle_area(t);
  switch (rule.kind) {
    case QuadratureRule::Kind::EdgeMidpoint:
      visit(midpoint(t[0], t[1]), area / 3.0);
      visit(midpoint(t[1], t[2]), area / 3.0);
      visit(midpoint(t[2], t[0]), area / 3.0);
      return;
    case QuadratureRule::Kind::Subdivision:
      if (rule.levels < 0 || rule.levels > 10) throw ConfigError("quadrature subdivision levels must be in [0, 10]");
      subdivide(t, rule.levels, area, visit);
      return;
  }
}

CellField project_initial(const Discretization& disc, const PointFunction& f, const QuadratureRule& rule) {
  const Mesh& mesh = disc.mesh();
  std::vector<double> values(mesh.num_cells());
  for (CellIndex k = 0; k < mesh.num_cells(); ++k) {
    double integral = 0.0;
    double weight = 0.0;
    for_each_quadrature_point(mesh, k, rule, [&](Point2 p, double w) {
      integral += w * f(p);
      weight += w;
    });
    values[k] = integral / weight;
    if (!std::isfinite(values[k])) {
      std::ostringstream msg;
      msg << "projection produced a non-finite average on cell " << k;
      throw Error(msg.str());
    }
  }
  return disc.field(std::move(values));
}

double min_at_quadrature_points(const Discretization& disc, const PointFunction& f, const QuadratureRule& rule) {
  const Mesh& mesh = disc.mesh();
  double m = std::numeric_limits<double>::infinity();
  for (CellIndex k = 0; k < mesh.num_cells(); ++k) {
    for_each_quadrature_point(mesh, k, rule, [&](Point2 p, double) { m = std::min(m, f(p)); });
  }
  return m;
}

CellField time_difference(const SpaceTimeField& f, std::size_t n) {
  if (n >= f.num_intervals()) throw ConfigError("time_difference: step index out of range");
  const auto a = f[n].values();
  const auto b = f[n + 1].values();
  std::vector<double> d(a.size());
  for (std::size_t k = 0; k < d.size(); ++k) d[k] = (b[k] - a[k]) / f.dt();
  return CellField(f[n].mesh_ptr(), std::move(d));
}

SpaceTimeNorms spacetime_norms(const Discretization& disc, const SpaceTimeField& f, const SolverConfig& cfg) {
  const double dt = f.dt();
  double l2 = 0.0, h1 = 0.0, semi = 0.0, dual = 0.0, dtl2 = 0.0, linf = 0.0;
  for (std::size_t n = 0; n <= f.num_intervals(); ++n) {
    const double sq = l2_inner(disc, f[n], f[n]);
    l2 += sq;
    linf = std::max(linf, std::sqrt(sq));
    h1 += inner_dirichlet(disc, f[n], f[n]);
    semi += inner_neumann(disc, f[n], f[n]);
  }
  for (std::size_t n = 0; n < f.num_intervals(); ++n) {
    const CellField d = time_difference(f, n);
    const double dn = dual_norm_minus1(disc, d, cfg);
    dual += dn * dn;
    dtl2 += l2_inner(disc, d, d);
  }
  SpaceTimeNorms out;
  out.l2_l2 = std::sqrt(dt * l2);
  out.l2_h1 = std::sqrt(dt * h1);
  out.l2_h1_semi = std::sqrt(dt * semi);
  out.l2_hminus1_of_dt = std::sqrt(dt * dual);
  out.l2_l2_of_dt = std::sqrt(dt * dtl2);
  out.linf_l2 = linf;
  return out;
}

}  // namespace p1fv
