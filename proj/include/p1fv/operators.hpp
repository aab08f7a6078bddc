#pragma once

// Two-point flux Laplacians, stored in the symmetric form -|K| Delta so the
// same matrices serve the inner products and the SPD solves.

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "p1fv/field.hpp"
#include "p1fv/linalg.hpp"
#include "p1fv/mesh.hpp"

namespace p1fv {

struct LaplacianPair {
  SparseSpdMatrix dirichlet;  ///< entries of -|K| Delta_{M,D}
  SparseSpdMatrix neumann;    ///< entries of -|K| Delta_{M,N}
  std::vector<double> mass;   ///< |K|
};

/// Faces are visited in index order; each internal face K|L contributes
/// -tau_sigma to (K,L) and (L,K), and each boundary face adds tau_sigma to
/// the Dirichlet diagonal only. Diagonals are minus the off-diagonal row
/// sums (plus the boundary part), so A_N has exactly zero row sums.
LaplacianPair assemble_laplacians(const Mesh& mesh, const GeometryTables& tables);

/// Validated mesh, geometry and Laplacians bundled together. The mesh is
/// shared with every CellField built on it.
class Discretization {
 public:
  /// Throws TopologyError / AdmissibilityError.
  explicit Discretization(Mesh mesh);
  explicit Discretization(std::shared_ptr<const Mesh> mesh);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  const GeometryTables& geometry() const noexcept { return geometry_; }
  const LaplacianPair& laplacians() const noexcept { return laplacians_; }
  std::size_t num_cells() const noexcept { return mesh_->num_cells(); }

  CellField field(std::vector<double> values) const { return CellField(mesh_, std::move(values)); }
  /// Throws MeshMismatchError when `f` lives on another mesh.
  void require_owns(const CellField& f) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  GeometryTables geometry_;
  LaplacianPair laplacians_;
};

/// Delta_{M,D} psi = -mass^{-1} A_D psi, per cell.
CellField apply_laplacian_dirichlet(const Discretization& disc, const CellField& psi);
/// Delta_{M,N} psi = -mass^{-1} A_N psi, per cell.
CellField apply_laplacian_neumann(const Discretization& disc, const CellField& psi);

/// Sign pattern and dominance certificate of one (shifted) matrix.
struct MatrixStructure {
  bool symmetric = false;
  bool positive_diagonal = false;
  bool offdiag_nonpositive = false;
  bool row_sums_nonnegative = false;
  bool zero_row_sums = false;
  /// Every connected block is weakly dominant with one strictly dominant
  /// row: together with the sign pattern this certifies a nonsingular
  /// M-matrix.
  bool irreducibly_dominant = false;

  bool is_m_matrix() const {
    return symmetric && positive_diagonal && offdiag_nonpositive && row_sums_nonnegative &&
           irreducibly_dominant;
  }
};

/// Structure of A + diag(shift).
MatrixStructure analyze_structure(const SparseSpdMatrix& a, std::span<const double> shift = {});

struct StructureReport {
  MatrixStructure dirichlet;
  MatrixStructure neumann;
  MatrixStructure temperature_system;  ///< mass/dt + A_D + mass*augmentation
  MatrixStructure intensity_system;    ///< mass + A_N
  bool neumann_singular = false;       ///< zero row sums: constants in the kernel
  bool passed = false;

  std::string summary() const;
};

/// `augmentation` is a per-cell nonnegative coefficient multiplied by the
/// mass (empty means zero).
StructureReport verify_structure(const LaplacianPair& pair, double dt,
                                 std::span<const double> augmentation = {});

}  // namespace p1fv
