#pragma once

// Compressed-row symmetric matrices and a Jacobi-preconditioned conjugate
// gradient solver.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

namespace p1fv {

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

class SparseSpdMatrix {
 public:
  SparseSpdMatrix() = default;

  /// Duplicates are summed in input order; each row gets an explicit
  /// diagonal entry (possibly zero).
  static SparseSpdMatrix from_triplets(std::size_t n, std::span<const Triplet> triplets);

  /// Laplacian-type matrix from its off-diagonal entries: the diagonal is
  /// minus the (column-ordered) off-diagonal row sum plus `diagonal_extra`,
  /// so rows with zero extra have row sums that are exactly zero.
  static SparseSpdMatrix from_offdiagonal(std::size_t n, std::span<const Triplet> offdiagonal,
                                          std::span<const double> diagonal_extra);

  std::size_t dim() const noexcept { return n_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }
  std::span<const std::size_t> row_start() const noexcept { return row_start_; }
  std::span<const std::size_t> col_index() const noexcept { return col_index_; }
  std::span<const double> values() const noexcept { return values_; }

  /// Entry (i, j), zero when not stored.
  double at(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal() const;
  /// Off-diagonal entries summed in column order, then the diagonal added.
  std::span<const double> row_sums() const noexcept { return row_sums_; }

  /// y = (A + diag(shift)) x; an empty shift means no shift. Rows are
  /// evaluated as sum_{j != i} a_ij (x_j - x_i) + (row_sum_i + shift_i) x_i,
  /// which is exact for constant x on zero-row-sum rows.
  void multiply(std::span<const double> x, std::span<double> y,
                std::span<const double> shift = {}) const;
  std::vector<double> multiply(std::span<const double> x) const;
  double quadratic_form(std::span<const double> x) const;

  /// Structural and numerical symmetry, |a_ij - a_ji| <= rel_tol max|a|.
  bool is_symmetric(double rel_tol = 1e-12) const;

  /// Coordinate list `row col value`, lexicographically sorted.
  void dump(std::ostream& out) const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_start_{0};
  std::vector<std::size_t> col_index_;
  std::vector<double> values_;
  std::vector<double> row_sums_;

  void finalize_row_sums();
};

struct SolverConfig {
  double rel_tol = 1e-11;
  double abs_tol = 1e-300;  ///< only guards b = 0; convergence is relative
  std::size_t max_iter = 0;  ///< 0 selects 10 * n

  /// Throws ConfigError when a tolerance is not positive.
  void validate() const;
  std::size_t iteration_cap(std::size_t n) const { return max_iter == 0 ? 10 * std::max<std::size_t>(n, 1) : max_iter; }
};

struct SolveResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double residual_norm = 0.0;  ///< true ||(A + shift) x - b||_2
};

/// Solves (A + diag(shift)) x = b by preconditioned CG. Converged when
/// ||(A + shift) x - b||_2 <= max(rel_tol ||b||_2, abs_tol). Throws
/// SolverError{NotConverged} after the iteration cap and
/// SolverError{Breakdown} on non-positive curvature or diagonal.
SolveResult solve_spd(const SparseSpdMatrix& a, std::span<const double> b,
                      const SolverConfig& cfg = {}, std::span<const double> shift = {},
                      std::span<const double> initial_guess = {});

}  // namespace p1fv
