#pragma once

// Conforming triangular meshes and the geometric tables of the two-point
// flux discretization.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "p1fv/geometry.hpp"

namespace p1fv {

using CellIndex = std::size_t;
inline constexpr CellIndex kNoCell = std::numeric_limits<CellIndex>::max();

struct Face {
  std::array<std::size_t, 2> vertices{};
  CellIndex inner = kNoCell;  ///< first cell that referenced the face
  CellIndex outer = kNoCell;  ///< kNoCell on the domain boundary

  bool is_boundary() const noexcept { return outer == kNoCell; }
  /// Cell across the face as seen from `k`.
  CellIndex other(CellIndex k) const noexcept { return k == inner ? outer : inner; }
};

/// Conforming triangulation with counterclockwise cells. Faces are enumerated
/// in first-seen order while sweeping cells and their local edges
/// (v0v1, v1v2, v2v0), which makes every derived quantity reproducible.
class Mesh {
 public:
  using CellVertices = std::array<std::size_t, 3>;

  /// Validates and builds face connectivity; throws TopologyError.
  Mesh(std::vector<Point2> vertices, std::vector<CellVertices> cells);

  const std::vector<Point2>& vertices() const noexcept { return vertices_; }
  const std::vector<CellVertices>& cells() const noexcept { return cells_; }
  const std::vector<Face>& faces() const noexcept { return faces_; }

  std::size_t num_cells() const noexcept { return cells_.size(); }
  std::size_t num_faces() const noexcept { return faces_.size(); }
  std::size_t num_boundary_faces() const noexcept { return num_boundary_faces_; }
  std::size_t num_internal_faces() const noexcept { return faces_.size() - num_boundary_faces_; }

  /// Face indices of cell k; entry e is the edge (v_e, v_{e+1 mod 3}).
  const std::array<std::size_t, 3>& cell_faces(CellIndex k) const { return cell_faces_[k]; }
  Triangle cell_triangle(CellIndex k) const;
  Point2 cell_centroid(CellIndex k) const;

 private:
  std::vector<Point2> vertices_;
  std::vector<CellVertices> cells_;
  std::vector<Face> faces_;
  std::vector<std::array<std::size_t, 3>> cell_faces_;
  std::size_t num_boundary_faces_ = 0;
};

/// Parses the plain-text mesh format:
///   nv nc
///   x y        (nv lines)
///   i j k      (nc lines, 0-based)
/// `#` starts a comment line. Throws ParseError or TopologyError.
Mesh load_mesh(std::istream& in);
Mesh load_mesh_file(const std::string& path);
void write_mesh(std::ostream& out, const Mesh& mesh);

/// Per-cell and per-face geometry of the two-point flux scheme.
struct GeometryTables {
  std::vector<double> cell_volume;
  std::vector<Point2> cell_center;  ///< circumcenters x_K
  std::vector<double> cell_diameter;
  std::vector<double> cell_inradius;
  std::vector<double> face_measure;
  std::vector<double> d_sigma;
  std::vector<double> transmissibility;  ///< |sigma| / d_sigma

  double theta = 0.0;  ///< min_K inradius / diameter
  double h = 0.0;      ///< max_K diameter
  double domain_measure = 0.0;
  double domain_diameter = 0.0;
  double boundary_measure = 0.0;
};

/// Relative tolerance on d_sigma, scaled by the cell diameter.
inline constexpr double kDSigmaRelTol = 1e-10;
/// Relative tolerance for "circumcenter in the closed cell".
inline constexpr double kInsideRelTol = 1e-12;

/// With `validate`, throws AdmissibilityError when some d_sigma <= 1e-10 h_K.
/// Without it, degenerate faces get an infinite transmissibility so that
/// check_admissibility can report them.
GeometryTables build_geometry(const Mesh& mesh, bool validate = true);

struct CellAdmissibility {
  bool circumcenter_inside = true;
  bool d_sigma_ok = true;
};

struct AdmissibilityReport {
  std::vector<CellAdmissibility> cells;
  std::size_t circumcenters_outside = 0;
  std::size_t degenerate_faces = 0;
  CellIndex first_failing_cell = kNoCell;
  double min_d_sigma_ratio = 0.0;  ///< min over faces of d_sigma / h_K
  double theta = 0.0;
  bool passed = true;

  std::string summary() const;
};

AdmissibilityReport check_admissibility(const Mesh& mesh, const GeometryTables& tables,
                                        double d_sigma_rel_tol = kDSigmaRelTol,
                                        double inside_rel_tol = kInsideRelTol);

/// Splits every triangle into four congruent children through the edge
/// midpoints. Child 4k+i of the result has parent k.
Mesh refine_uniform(const Mesh& mesh);

/// Alternating-offset strip triangulation of [0,lx]x[0,ly] with nx cells per
/// row and ny rows: isosceles interior cells, right triangles along the
/// vertical sides (their hypotenuse is internal, so every d_sigma > 0).
Mesh rectangle_mesh(std::size_t nx, std::size_t ny, double lx = 1.0, double ly = 1.0);

/// Parallelogram made of 2*nx*ny equilateral triangles with the given edge.
Mesh equilateral_mesh(std::size_t nx, std::size_t ny, double edge = 1.0);

/// Boundary loop(s) traced from boundary faces, each counterclockwise.
std::vector<std::vector<Point2>> boundary_loops(const Mesh& mesh);

/// Uniform bucket grid over cell bounding boxes for point location and
/// overlap queries.
class CellLocator {
 public:
  explicit CellLocator(const Mesh& mesh);

  /// A cell whose closed triangle contains p, or kNoCell.
  CellIndex locate(Point2 p) const;
  /// Cells whose bounding box meets [lo, hi] (no duplicates, sorted).
  std::vector<CellIndex> candidates(Point2 lo, Point2 hi) const;

 private:
  const Mesh* mesh_;
  Point2 lo_{}, hi_{};
  std::size_t nx_ = 1, ny_ = 1;
  double dx_ = 1.0, dy_ = 1.0;
  std::vector<std::vector<CellIndex>> buckets_;

  std::size_t bx(double x) const;
  std::size_t by(double y) const;
};

}  // namespace p1fv
