#include "p1fv/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "p1fv/error.hpp"

namespace p1fv {

namespace {

std::uint64_t edge_key(std::size_t a, std::size_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
}

// Rejects vertices lying strictly inside a boundary face (hanging nodes).
void check_hanging_nodes(const std::vector<Point2>& vertices, const std::vector<Face>& faces) {
  if (vertices.empty()) return;
  Point2 lo = vertices.front();
  Point2 hi = vertices.front();
  for (const auto& p : vertices) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const std::size_t n = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::sqrt(static_cast<double>(vertices.size()))));
  const double dx = std::max(hi.x - lo.x, 1e-300) / static_cast<double>(n);
  const double dy = std::max(hi.y - lo.y, 1e-300) / static_cast<double>(n);
  auto bucket = [&](double v, double l, double d) {
    return std::min(n - 1, static_cast<std::size_t>(std::max(0.0, (v - l) / d)));
  };
  std::vector<std::vector<std::size_t>> grid(n * n);
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    grid[bucket(vertices[i].y, lo.y, dy) * n + bucket(vertices[i].x, lo.x, dx)].push_back(i);
  }
  for (const auto& f : faces) {
    if (!f.is_boundary()) continue;
    const Point2 a = vertices[f.vertices[0]];
    const Point2 b = vertices[f.vertices[1]];
    const double len = distance(a, b);
    const std::size_t x0 = bucket(std::min(a.x, b.x), lo.x, dx);
    const std::size_t x1 = bucket(std::max(a.x, b.x), lo.x, dx);
    const std::size_t y0 = bucket(std::min(a.y, b.y), lo.y, dy);
    const std::size_t y1 = bucket(std::max(a.y, b.y), lo.y, dy);
    for (std::size_t j = y0; j <= y1; ++j) {
      for (std::size_t i = x0; i <= x1; ++i) {
        for (std::size_t v : grid[j * n + i]) {
          if (v == f.vertices[0] || v == f.vertices[1]) continue;
          const Point2 p = vertices[v];
          const double off = std::abs(signed_line_distance(p, a, b));
          const double s = dot(p - a, b - a) / (len * len);
          if (off <= 1e-12 * len && s > 1e-12 && s < 1.0 - 1e-12) {
            std::ostringstream msg;
            msg << "non-conforming mesh: vertex " << v << " hangs on face (" << f.vertices[0]
                << ", " << f.vertices[1] << ")";
            throw TopologyError(msg.str());
          }
        }
      }
    }
  }
}

}  // namespace

Mesh::Mesh(std::vector<Point2> vertices, std::vector<CellVertices> cells)
    : vertices_(std::move(vertices)), cells_(std::move(cells)) {
  const std::size_t nv = vertices_.size();
  for (const auto& p : vertices_) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw TopologyError("non-finite vertex coordinate");
  }
  std::map<std::array<std::size_t, 3>, std::size_t> seen_cells;
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const auto& c = cells_[k];
    for (std::size_t v : c) {
      if (v >= nv) {
        std::ostringstream msg;
        msg << "cell " << k << " references vertex " << v << " (only " << nv << " vertices)";
        throw TopologyError(msg.str());
      }
    }
    if (c[0] == c[1] || c[1] == c[2] || c[0] == c[2]) {
      std::ostringstream msg;
      msg << "cell " << k << " repeats a vertex";
      throw TopologyError(msg.str());
    }
    auto sorted = c;
    std::sort(sorted.begin(), sorted.end());
    if (auto [it, inserted] = seen_cells.emplace(sorted, k); !inserted) {
      std::ostringstream msg;
      msg << "duplicate cell " << k << " (same vertices as cell " << it->second << ")";
      throw TopologyError(msg.str());
    }
    const double a2 = signed_area2(vertices_[c[0]], vertices_[c[1]], vertices_[c[2]]);
    const Point2 e0 = vertices_[c[1]] - vertices_[c[0]];
    const Point2 e1 = vertices_[c[2]] - vertices_[c[0]];
    const double scale = std::max(dot(e0, e0), dot(e1, e1));
    if (std::abs(a2) <= 1e-14 * scale) {
      std::ostringstream msg;
      msg << "cell " << k << " has zero area";
      throw TopologyError(msg.str());
    }
    if (a2 < 0.0) {
      std::ostringstream msg;
      msg << "cell " << k << " has inverted (clockwise) orientation";
      throw TopologyError(msg.str());
    }
  }

  std::unordered_map<std::uint64_t, std::size_t> face_of_edge;
  face_of_edge.reserve(3 * cells_.size());
  cell_faces_.resize(cells_.size());
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    const auto& c = cells_[k];
    for (int e = 0; e < 3; ++e) {
      const std::size_t a = c[e];
      const std::size_t b = c[(e + 1) % 3];
      auto [it, inserted] = face_of_edge.try_emplace(edge_key(a, b), faces_.size());
      if (inserted) {
        faces_.push_back(Face{{a, b}, k, kNoCell});
      } else {
        Face& f = faces_[it->second];
        if (f.outer != kNoCell) {
          std::ostringstream msg;
          msg << "non-conforming mesh: face (" << a << ", " << b << ") shared by more than two cells";
          throw TopologyError(msg.str());
        }
        // A neighbour with the same orientation traverses the shared edge
        // in the opposite direction.
        if (f.vertices[0] != b || f.vertices[1] != a) {
          std::ostringstream msg;
          msg << "cells " << f.inner << " and " << k << " overlap across face (" << a << ", " << b << ")";
          throw TopologyError(msg.str());
        }
        f.outer = k;
      }
      cell_faces_[k][e] = it->second;
    }
  }
  num_boundary_faces_ = static_cast<std::size_t>(
      std::count_if(faces_.begin(), faces_.end(), [](const Face& f) { return f.is_boundary(); }));
  check_hanging_nodes(vertices_, faces_);
}

Triangle Mesh::cell_triangle(CellIndex k) const {
  const auto& c = cells_[k];
  return {vertices_[c[0]], vertices_[c[1]], vertices_[c[2]]};
}

Point2 Mesh::cell_centroid(CellIndex k) const {
  const auto t = cell_triangle(k);
  return {(t[0].x + t[1].x + t[2].x) / 3.0, (t[0].y + t[1].y + t[2].y) / 3.0};
}

namespace {

// Reads the next non-comment token line by line.
class TokenReader {
 public:
  explicit TokenReader(std::istream& in) : in_(in) {}

  template <typename T>
  T next(const char* what) {
    std::string tok;
    while (!(line_ >> tok)) {
      std::string raw;
      if (!std::getline(in_, raw)) {
        throw ParseError(std::string("mesh: unexpected end of input while reading ") + what);
      }
      ++lineno_;
      const auto first = raw.find_first_not_of(" \t\r");
      if (first != std::string::npos && raw[first] == '#') raw.clear();
      line_.clear();
      line_.str(raw);
    }
    std::istringstream conv(tok);
    T value{};
    if (!(conv >> value) || !conv.eof()) {
      std::ostringstream msg;
      msg << "mesh: line " << lineno_ << ": cannot parse '" << tok << "' as " << what;
      throw ParseError(msg.str());
    }
    return value;
  }

  bool has_more() {
    std::string tok;
    if (line_ >> tok) return true;
    std::string raw;
    while (std::getline(in_, raw)) {
      const auto first = raw.find_first_not_of(" \t\r");
      if (first != std::string::npos && raw[first] != '#') return true;
    }
    return false;
  }

 private:
  std::istream& in_;
  std::istringstream line_;
  std::size_t lineno_ = 0;
};

}  // namespace

Mesh load_mesh(std::istream& in) {
  TokenReader reader(in);
  const auto nv = reader.next<long long>("vertex count");
  const auto nc = reader.next<long long>("cell count");
  if (nv < 3 || nc < 1) throw ParseError("mesh: need at least 3 vertices and 1 cell");
  std::vector<Point2> vertices(static_cast<std::size_t>(nv));
  for (auto& p : vertices) {
    p.x = reader.next<double>("x coordinate");
    p.y = reader.next<double>("y coordinate");
  }
  std::vector<Mesh::CellVertices> cells(static_cast<std::size_t>(nc));
  for (auto& c : cells) {
    for (auto& v : c) {
      const auto idx = reader.next<long long>("vertex index");
      if (idx < 0) throw ParseError("mesh: negative vertex index");
      v = static_cast<std::size_t>(idx);
    }
  }
  if (reader.has_more()) throw ParseError("mesh: trailing data after the last cell");
  return Mesh(std::move(vertices), std::move(cells));
}

Mesh load_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("mesh: cannot open '" + path + "'");
  return load_mesh(in);
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out << mesh.vertices().size() << ' ' << mesh.num_cells() << '\n';
  out << std::setprecision(17);
  for (const auto& p : mesh.vertices()) out << p.x << ' ' << p.y << '\n';
  for (const auto& c : mesh.cells()) out << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
}

GeometryTables build_geometry(const Mesh& mesh, bool validate) {
  const std::size_t nc = mesh.num_cells();
  const std::size_t nf = mesh.num_faces();
  GeometryTables g;
  g.cell_volume.resize(nc);
  g.cell_center.resize(nc);
  g.cell_diameter.resize(nc);
  g.cell_inradius.resize(nc);
  g.face_measure.resize(nf);
  g.d_sigma.resize(nf);
  g.transmissibility.resize(nf);
  g.theta = std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < nc; ++k) {
    const auto t = mesh.cell_triangle(k);
    const double area = triangle_area(t);
    const double a = distance(t[1], t[2]);
    const double b = distance(t[2], t[0]);
    const double c = distance(t[0], t[1]);
    g.cell_volume[k] = area;
    g.cell_center[k] = circumcenter(t);
    g.cell_diameter[k] = std::max({a, b, c});
    g.cell_inradius[k] = 2.0 * area / (a + b + c);
    g.theta = std::min(g.theta, g.cell_inradius[k] / g.cell_diameter[k]);
    g.h = std::max(g.h, g.cell_diameter[k]);
    g.domain_measure += area;
  }

  const auto& verts = mesh.vertices();
  std::vector<std::size_t> boundary_vertices;
  for (std::size_t f = 0; f < nf; ++f) {
    const Face& face = mesh.faces()[f];
    const Point2 a = verts[face.vertices[0]];
    const Point2 b = verts[face.vertices[1]];
    g.face_measure[f] = distance(a, b);
    double scale = g.cell_diameter[face.inner];
    if (face.is_boundary()) {
      g.d_sigma[f] = std::abs(signed_line_distance(g.cell_center[face.inner], a, b));
      g.boundary_measure += g.face_measure[f];
      boundary_vertices.push_back(face.vertices[0]);
      boundary_vertices.push_back(face.vertices[1]);
    } else {
      g.d_sigma[f] = distance(g.cell_center[face.inner], g.cell_center[face.outer]);
      scale = std::max(scale, g.cell_diameter[face.outer]);
    }
    if (g.d_sigma[f] <= kDSigmaRelTol * scale) {
      if (validate) {
        std::ostringstream msg;
        msg << "inadmissible mesh: face " << f << " (vertices " << face.vertices[0] << ", "
            << face.vertices[1] << ") has d_sigma = " << g.d_sigma[f]
            << ", degenerate two-point transmissibility";
        throw AdmissibilityError(msg.str());
      }
      g.transmissibility[f] = std::numeric_limits<double>::infinity();
    } else {
      g.transmissibility[f] = g.face_measure[f] / g.d_sigma[f];
    }
  }

  std::sort(boundary_vertices.begin(), boundary_vertices.end());
  boundary_vertices.erase(std::unique(boundary_vertices.begin(), boundary_vertices.end()),
                          boundary_vertices.end());
  for (std::size_t i = 0; i < boundary_vertices.size(); ++i) {
    for (std::size_t j = i + 1; j < boundary_vertices.size(); ++j) {
      g.domain_diameter =
          std::max(g.domain_diameter, distance(verts[boundary_vertices[i]], verts[boundary_vertices[j]]));
    }
  }
  return g;
}

std::string AdmissibilityReport::summary() const {
  std::ostringstream out;
  out << "admissible: " << (passed ? "PASS" : "FAIL") << '\n'
      << "cells: " << cells.size() << '\n'
      << "circumcenters_outside: " << circumcenters_outside << '\n'
      << "degenerate_faces: " << degenerate_faces << '\n'
      << std::setprecision(10) << "min_d_sigma_over_h: " << min_d_sigma_ratio << '\n'
      << "theta_M: " << theta << '\n';
  if (first_failing_cell != kNoCell) out << "first_failing_cell: " << first_failing_cell << '\n';
  return out.str();
}

AdmissibilityReport check_admissibility(const Mesh& mesh, const GeometryTables& tables,
                                        double d_sigma_rel_tol, double inside_rel_tol) {
  AdmissibilityReport rep;
  const std::size_t nc = mesh.num_cells();
  rep.cells.resize(nc);
  rep.theta = tables.theta;
  rep.min_d_sigma_ratio = std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < nc; ++k) {
    const double tol = inside_rel_tol * tables.cell_diameter[k];
    if (!triangle_contains(mesh.cell_triangle(k), tables.cell_center[k], tol)) {
      rep.cells[k].circumcenter_inside = false;
      ++rep.circumcenters_outside;
    }
  }
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces()[f];
    double scale = tables.cell_diameter[face.inner];
    if (!face.is_boundary()) scale = std::max(scale, tables.cell_diameter[face.outer]);
    const double ratio = tables.d_sigma[f] / scale;
    rep.min_d_sigma_ratio = std::min(rep.min_d_sigma_ratio, ratio);
    if (!(ratio > d_sigma_rel_tol)) {
      ++rep.degenerate_faces;
      rep.cells[face.inner].d_sigma_ok = false;
      if (!face.is_boundary()) rep.cells[face.outer].d_sigma_ok = false;
    }
  }
  for (std::size_t k = 0; k < nc; ++k) {
    if (!rep.cells[k].circumcenter_inside || !rep.cells[k].d_sigma_ok) {
      rep.first_failing_cell = k;
      break;
    }
  }
  rep.passed = rep.circumcenters_outside == 0 && rep.degenerate_faces == 0;
  return rep;
}

Mesh refine_uniform(const Mesh& mesh) {
  const std::size_t nv = mesh.vertices().size();
  std::vector<Point2> vertices = mesh.vertices();
  vertices.reserve(nv + mesh.num_faces());
  for (const auto& f : mesh.faces()) {
    vertices.push_back(midpoint(vertices[f.vertices[0]], vertices[f.vertices[1]]));
  }
  std::vector<Mesh::CellVertices> cells;
  cells.reserve(4 * mesh.num_cells());
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto& c = mesh.cells()[k];
    const auto& cf = mesh.cell_faces(k);
    const std::size_t m01 = nv + cf[0];
    const std::size_t m12 = nv + cf[1];
    const std::size_t m20 = nv + cf[2];
    cells.push_back({c[0], m01, m20});
    cells.push_back({m01, c[1], m12});
    cells.push_back({m20, m12, c[2]});
    cells.push_back({m01, m12, m20});
  }
  return Mesh(std::move(vertices), std::move(cells));
}

Mesh rectangle_mesh(std::size_t nx, std::size_t ny, double lx, double ly) {
  if (nx < 1 || ny < 1 || !(lx > 0.0) || !(ly > 0.0)) {
    throw TopologyError("rectangle_mesh: need nx, ny >= 1 and positive extents");
  }
  const double hx = lx / static_cast<double>(nx);
  const double hy = ly / static_cast<double>(ny);
  std::vector<Point2> vertices;
  std::vector<std::size_t> row_start(ny + 2);
  // Even rows: x = i hx (nx+1 nodes). Odd rows: 0, (i+1/2) hx, lx (nx+2 nodes).
  for (std::size_t j = 0; j <= ny; ++j) {
    row_start[j] = vertices.size();
    const double y = (j == ny) ? ly : static_cast<double>(j) * hy;
    if (j % 2 == 0) {
      for (std::size_t i = 0; i <= nx; ++i) {
        vertices.push_back({i == nx ? lx : static_cast<double>(i) * hx, y});
      }
    } else {
      vertices.push_back({0.0, y});
      for (std::size_t i = 0; i < nx; ++i) vertices.push_back({(static_cast<double>(i) + 0.5) * hx, y});
      vertices.push_back({lx, y});
    }
  }
  std::vector<Mesh::CellVertices> cells;
  cells.reserve(ny * (2 * nx + 1));
  for (std::size_t j = 0; j < ny; ++j) {
    const std::size_t b0 = row_start[j];
    const std::size_t t0 = row_start[j + 1];
    if (j % 2 == 0) {
      // bottom: B_i = b0 + i; top: T_0 = t0, T_{i+1} = t0 + i + 1, T_{nx+1}.
      cells.push_back({b0, t0 + 1, t0});
      for (std::size_t i = 0; i < nx; ++i) {
        cells.push_back({b0 + i, b0 + i + 1, t0 + i + 1});
        if (i + 1 < nx) cells.push_back({b0 + i + 1, t0 + i + 2, t0 + i + 1});
      }
      cells.push_back({b0 + nx, t0 + nx + 1, t0 + nx});
    } else {
      cells.push_back({b0, b0 + 1, t0});
      for (std::size_t i = 0; i < nx; ++i) {
        cells.push_back({b0 + i + 1, t0 + i + 1, t0 + i});
        if (i + 1 < nx) cells.push_back({b0 + i + 1, b0 + i + 2, t0 + i + 1});
      }
      cells.push_back({b0 + nx, b0 + nx + 1, t0 + nx});
    }
  }
  return Mesh(std::move(vertices), std::move(cells));
}

Mesh equilateral_mesh(std::size_t nx, std::size_t ny, double edge) {
  if (nx < 1 || ny < 1 || !(edge > 0.0)) {
    throw TopologyError("equilateral_mesh: need nx, ny >= 1 and a positive edge");
  }
  const double rise = edge * std::sqrt(3.0) / 2.0;
  std::vector<Point2> vertices;
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      vertices.push_back({(static_cast<double>(i) + 0.5 * static_cast<double>(j)) * edge,
                          static_cast<double>(j) * rise});
    }
  }
  auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };
  std::vector<Mesh::CellVertices> cells;
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      cells.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
      cells.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return Mesh(std::move(vertices), std::move(cells));
}

std::vector<std::vector<Point2>> boundary_loops(const Mesh& mesh) {
  // Oriented boundary edges keep the owning cell on their left.
  std::map<std::size_t, std::size_t> next;
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto& c = mesh.cells()[k];
    for (int e = 0; e < 3; ++e) {
      if (mesh.faces()[mesh.cell_faces(k)[e]].is_boundary()) next[c[e]] = c[(e + 1) % 3];
    }
  }
  std::vector<std::vector<Point2>> loops;
  while (!next.empty()) {
    std::vector<Point2> loop;
    const std::size_t start = next.begin()->first;
    std::size_t v = start;
    do {
      loop.push_back(mesh.vertices()[v]);
      auto it = next.find(v);
      if (it == next.end()) throw TopologyError("boundary is not a closed loop");
      v = it->second;
      next.erase(it);
    } while (v != start);
    loops.push_back(std::move(loop));
  }
  return loops;
}

CellLocator::CellLocator(const Mesh& mesh) : mesh_(&mesh) {
  const auto& verts = mesh.vertices();
  lo_ = hi_ = verts.front();
  for (const auto& p : verts) {
    lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
    hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
  }
  const double side = std::sqrt(static_cast<double>(mesh.num_cells()));
  nx_ = ny_ = std::max<std::size_t>(1, static_cast<std::size_t>(side));
  dx_ = std::max(hi_.x - lo_.x, 1e-300) / static_cast<double>(nx_);
  dy_ = std::max(hi_.y - lo_.y, 1e-300) / static_cast<double>(ny_);
  buckets_.resize(nx_ * ny_);
  for (std::size_t k = 0; k < mesh.num_cells(); ++k) {
    const auto t = mesh.cell_triangle(k);
    const double x0 = std::min({t[0].x, t[1].x, t[2].x});
    const double x1 = std::max({t[0].x, t[1].x, t[2].x});
    const double y0 = std::min({t[0].y, t[1].y, t[2].y});
    const double y1 = std::max({t[0].y, t[1].y, t[2].y});
    for (std::size_t j = by(y0); j <= by(y1); ++j) {
      for (std::size_t i = bx(x0); i <= bx(x1); ++i) buckets_[j * nx_ + i].push_back(k);
    }
  }
}

std::size_t CellLocator::bx(double x) const {
  const double r = std::floor((x - lo_.x) / dx_);
  return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(nx_ - 1)));
}

std::size_t CellLocator::by(double y) const {
  const double r = std::floor((y - lo_.y) / dy_);
  return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(ny_ - 1)));
}

CellIndex CellLocator::locate(Point2 p) const {
  if (p.x < lo_.x || p.x > hi_.x || p.y < lo_.y || p.y > hi_.y) return kNoCell;
  for (CellIndex k : buckets_[by(p.y) * nx_ + bx(p.x)]) {
    if (triangle_contains(mesh_->cell_triangle(k), p)) return k;
  }
  return kNoCell;
}

std::vector<CellIndex> CellLocator::candidates(Point2 lo, Point2 hi) const {
  std::vector<CellIndex> out;
  if (hi.x < lo_.x || lo.x > hi_.x || hi.y < lo_.y || lo.y > hi_.y) return out;
  for (std::size_t j = by(lo.y); j <= by(hi.y); ++j) {
    for (std::size_t i = bx(lo.x); i <= bx(hi.x); ++i) {
      const auto& b = buckets_[j * nx_ + i];
      out.insert(out.end(), b.begin(), b.end());
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace p1fv
