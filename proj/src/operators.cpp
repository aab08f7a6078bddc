#include "p1fv/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "p1fv/error.hpp"

namespace p1fv {

LaplacianPair assemble_laplacians(const Mesh& mesh, const GeometryTables& tables) {
  const std::size_t n = mesh.num_cells();
  std::vector<Triplet> off;
  off.reserve(2 * mesh.num_internal_faces());
  std::vector<double> boundary(n, 0.0);
  for (std::size_t f = 0; f < mesh.num_faces(); ++f) {
    const Face& face = mesh.faces()[f];
    const double tau = tables.transmissibility[f];
    if (face.is_boundary()) {
      boundary[face.inner] += tau;
    } else {
      off.push_back({face.inner, face.outer, -tau});
      off.push_back({face.outer, face.inner, -tau});
    }
  }
  const std::vector<double> none(n, 0.0);
  return {SparseSpdMatrix::from_offdiagonal(n, off, boundary),
          SparseSpdMatrix::from_offdiagonal(n, off, none), tables.cell_volume};
}

Discretization::Discretization(Mesh mesh) : Discretization(std::make_shared<const Mesh>(std::move(mesh))) {}

Discretization::Discretization(std::shared_ptr<const Mesh> mesh)
    : mesh_(std::move(mesh)), geometry_(build_geometry(*mesh_, true)) {
  const auto report = check_admissibility(*mesh_, geometry_);
  if (!report.passed) {
    std::ostringstream msg;
    msg << "inadmissible mesh: " << report.circumcenters_outside << " circumcenter(s) outside their cell";
    if (report.first_failing_cell != kNoCell) msg << ", first at cell " << report.first_failing_cell;
    throw AdmissibilityError(msg.str());
  }
  laplacians_ = assemble_laplacians(*mesh_, geometry_);
}

void Discretization::require_owns(const CellField& f) const {
  if (f.mesh_ptr() != mesh_) throw MeshMismatchError("field is defined on a different mesh");
}

namespace {

CellField apply_scaled(const Discretization& disc, const SparseSpdMatrix& a, const CellField& psi) {
  disc.require_owns(psi);
  auto y = a.multiply(psi.values());
  const auto& mass = disc.laplacians().mass;
  for (std::size_t k = 0; k < y.size(); ++k) y[k] = -y[k] / mass[k];
  return disc.field(std::move(y));
}

}  // namespace

CellField apply_laplacian_dirichlet(const Discretization& disc, const CellField& psi) {
  return apply_scaled(disc, disc.laplacians().dirichlet, psi);
}

CellField apply_laplacian_neumann(const Discretization& disc, const CellField& psi) {
  return apply_scaled(disc, disc.laplacians().neumann, psi);
}

MatrixStructure analyze_structure(const SparseSpdMatrix& a, std::span<const double> shift) {
  const std::size_t n = a.dim();
  const auto rs = a.row_start();
  const auto ci = a.col_index();
  const auto va = a.values();
  MatrixStructure s;
  s.symmetric = a.is_symmetric();
  s.positive_diagonal = true;
  s.offdiag_nonpositive = true;
  s.row_sums_nonnegative = true;
  s.zero_row_sums = true;

  std::vector<bool> strict(n, false);
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  bool weakly_dominant = true;
  for (std::size_t i = 0; i < n; ++i) {
    double diag = shift.empty() ? 0.0 : shift[i];
    double off_abs = 0.0;
    double scale = std::abs(diag);
    for (std::size_t p = rs[i]; p < rs[i + 1]; ++p) {
      scale = std::max(scale, std::abs(va[p]));
      if (ci[p] == i) {
        diag += va[p];
      } else {
        off_abs += std::abs(va[p]);
        if (va[p] > 0.0) s.offdiag_nonpositive = false;
        if (va[p] != 0.0) parent[find(i)] = find(ci[p]);
      }
    }
    if (!(diag > 0.0)) s.positive_diagonal = false;
    // Row sums of assembled Laplacians cancel up to roundoff only.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * scale;
    const double margin = diag - off_abs;
    if (margin < -slack) {
      s.row_sums_nonnegative = false;
      weakly_dominant = false;
    }
    if (std::abs(margin) > slack) s.zero_row_sums = false;
    strict[i] = margin > slack;
  }
  std::vector<bool> block_has_strict(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (strict[i]) block_has_strict[find(i)] = true;
  }
  s.irreducibly_dominant = weakly_dominant;
  for (std::size_t i = 0; i < n; ++i) {
    if (!block_has_strict[find(i)]) s.irreducibly_dominant = false;
  }
  return s;
}

StructureReport verify_structure(const LaplacianPair& pair, double dt,
                                 std::span<const double> augmentation) {
  if (!(dt > 0.0)) throw ConfigError("verify_structure: dt must be positive");
  const std::size_t n = pair.mass.size();
  if (!augmentation.empty() && augmentation.size() != n) {
    throw MeshMismatchError("verify_structure: augmentation size mismatch");
  }
  std::vector<double> u_shift(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double aug = augmentation.empty() ? 0.0 : augmentation[k];
    if (aug < 0.0) throw ConfigError("verify_structure: augmentation must be nonnegative");
    u_shift[k] = pair.mass[k] * (1.0 / dt + aug);
  }
  StructureReport r;
  r.dirichlet = analyze_structure(pair.dirichlet);
  r.neumann = analyze_structure(pair.neumann);
  r.temperature_system = analyze_structure(pair.dirichlet, u_shift);
  r.intensity_system = analyze_structure(pair.neumann, pair.mass);
  r.neumann_singular = r.neumann.zero_row_sums;
  const auto sign_ok = [](const MatrixStructure& m) {
    return m.symmetric && m.offdiag_nonpositive && m.row_sums_nonnegative;
  };
  r.passed = sign_ok(r.dirichlet) && sign_ok(r.neumann) && r.dirichlet.irreducibly_dominant &&
             r.temperature_system.is_m_matrix() && r.intensity_system.is_m_matrix();
  return r;
}

std::string StructureReport::summary() const {
  std::ostringstream out;
  auto line = [&](const char* name, const MatrixStructure& m) {
    out << name << ": symmetric=" << m.symmetric << " offdiag_nonpositive=" << m.offdiag_nonpositive
        << " row_sums_nonnegative=" << m.row_sums_nonnegative
        << " irreducibly_dominant=" << m.irreducibly_dominant << " m_matrix=" << m.is_m_matrix() << '\n';
  };
  line("A_dirichlet", dirichlet);
  line("A_neumann", neumann);
  line("temperature_system", temperature_system);
  line("intensity_system", intensity_system);
  out << "A_neumann_singular: " << neumann_singular << '\n'
      << "structure: " << (passed ? "PASS" : "FAIL") << '\n';
  return out.str();
}

}  // namespace p1fv
