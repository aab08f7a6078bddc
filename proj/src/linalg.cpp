#include "p1fv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "p1fv/error.hpp"

namespace p1fv {

SparseSpdMatrix SparseSpdMatrix::from_triplets(std::size_t n, std::span<const Triplet> triplets) {
  std::vector<Triplet> sorted;
  sorted.reserve(triplets.size() + n);
  for (const auto& t : triplets) {
    if (t.row >= n || t.col >= n) throw MeshMismatchError("triplet index out of range");
    sorted.push_back(t);
  }
  for (std::size_t i = 0; i < n; ++i) sorted.push_back({i, i, 0.0});
  std::stable_sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseSpdMatrix m;
  m.n_ = n;
  m.row_start_.assign(n + 1, 0);
  for (std::size_t i = 0; i < sorted.size();) {
    const std::size_t r = sorted[i].row;
    const std::size_t c = sorted[i].col;
    double sum = 0.0;
    for (; i < sorted.size() && sorted[i].row == r && sorted[i].col == c; ++i) sum += sorted[i].value;
    m.col_index_.push_back(c);
    m.values_.push_back(sum);
    ++m.row_start_[r + 1];
  }
  std::partial_sum(m.row_start_.begin(), m.row_start_.end(), m.row_start_.begin());
  m.finalize_row_sums();
  return m;
}

SparseSpdMatrix SparseSpdMatrix::from_offdiagonal(std::size_t n, std::span<const Triplet> offdiagonal,
                                                  std::span<const double> diagonal_extra) {
  if (diagonal_extra.size() != n) throw MeshMismatchError("from_offdiagonal: size mismatch");
  for (const auto& t : offdiagonal) {
    if (t.row == t.col) throw MeshMismatchError("from_offdiagonal: diagonal triplet");
  }
  SparseSpdMatrix m = from_triplets(n, offdiagonal);
  for (std::size_t i = 0; i < n; ++i) {
    double off = 0.0;
    std::size_t diag_pos = 0;
    for (std::size_t p = m.row_start_[i]; p < m.row_start_[i + 1]; ++p) {
      if (m.col_index_[p] == i) {
        diag_pos = p;
      } else {
        off += m.values_[p];
      }
    }
    m.values_[diag_pos] = -off + diagonal_extra[i];
  }
  m.finalize_row_sums();
  return m;
}

void SparseSpdMatrix::finalize_row_sums() {
  row_sums_.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) {
      if (col_index_[p] == i) {
        diag = values_[p];
      } else {
        off += values_[p];
      }
    }
    row_sums_[i] = off + diag;
  }
}

double SparseSpdMatrix::at(std::size_t i, std::size_t j) const {
  const auto begin = col_index_.begin() + static_cast<std::ptrdiff_t>(row_start_[i]);
  const auto end = col_index_.begin() + static_cast<std::ptrdiff_t>(row_start_[i + 1]);
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_index_.begin())];
}

std::vector<double> SparseSpdMatrix::diagonal() const {
  std::vector<double> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
  return d;
}

void SparseSpdMatrix::multiply(std::span<const double> x, std::span<double> y,
                               std::span<const double> shift) const {
  if (x.size() != n_ || y.size() != n_ || (!shift.empty() && shift.size() != n_)) {
    throw MeshMismatchError("matrix-vector size mismatch");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const double xi = x[i];
    double acc = 0.0;
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) {
      const std::size_t j = col_index_[p];
      if (j != i) acc += values_[p] * (x[j] - xi);
    }
    y[i] = acc + (row_sums_[i] + (shift.empty() ? 0.0 : shift[i])) * xi;
  }
}

std::vector<double> SparseSpdMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(n_);
  multiply(x, y);
  return y;
}

double SparseSpdMatrix::quadratic_form(std::span<const double> x) const {
  const auto ax = multiply(x);
  return std::inner_product(x.begin(), x.end(), ax.begin(), 0.0);
}

bool SparseSpdMatrix::is_symmetric(double rel_tol) const {
  double scale = 0.0;
  for (double v : values_) scale = std::max(scale, std::abs(v));
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) {
      const std::size_t j = col_index_[p];
      const auto begin = col_index_.begin() + static_cast<std::ptrdiff_t>(row_start_[j]);
      const auto end = col_index_.begin() + static_cast<std::ptrdiff_t>(row_start_[j + 1]);
      if (!std::binary_search(begin, end, i)) return false;
      if (std::abs(values_[p] - at(j, i)) > rel_tol * scale) return false;
    }
  }
  return true;
}

void SparseSpdMatrix::dump(std::ostream& out) const {
  std::ostringstream line;
  line << std::setprecision(17);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t p = row_start_[i]; p < row_start_[i + 1]; ++p) {
      line << i << ' ' << col_index_[p] << ' ' << values_[p] << '\n';
    }
  }
  out << line.str();
}

void SolverConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("solver tolerances must be positive");
}

namespace {

double norm2(std::span<const double> v) {
  return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

double true_residual(const SparseSpdMatrix& a, std::span<const double> shift,
                     std::span<const double> b, std::span<const double> x, std::vector<double>& r) {
  a.multiply(x, r, shift);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - r[i];
  return norm2(r);
}

}  // namespace

SolveResult solve_spd(const SparseSpdMatrix& a, std::span<const double> b, const SolverConfig& cfg,
                      std::span<const double> shift, std::span<const double> initial_guess) {
  cfg.validate();
  const std::size_t n = a.dim();
  if (b.size() != n || (!shift.empty() && shift.size() != n) ||
      (!initial_guess.empty() && initial_guess.size() != n)) {
    throw MeshMismatchError("solve_spd: size mismatch");
  }
  for (double v : b) {
    if (!std::isfinite(v)) throw SolverError(SolverError::Kind::Breakdown, "solve_spd: non-finite right-hand side");
  }

  std::vector<double> inv_diag = a.diagonal();
  for (std::size_t i = 0; i < n; ++i) {
    const double d = inv_diag[i] + (shift.empty() ? 0.0 : shift[i]);
    if (!(d > 0.0)) {
      std::ostringstream msg;
      msg << "solve_spd: breakdown, non-positive diagonal entry " << d << " in row " << i;
      throw SolverError(SolverError::Kind::Breakdown, msg.str());
    }
    inv_diag[i] = 1.0 / d;
  }

  SolveResult res;
  res.x.assign(n, 0.0);
  if (!initial_guess.empty()) std::copy(initial_guess.begin(), initial_guess.end(), res.x.begin());
  const double target = std::max(cfg.rel_tol * norm2(b), cfg.abs_tol);
  const std::size_t cap = cfg.iteration_cap(n);

  std::vector<double> r(n), z(n), p(n), q(n);
  double rnorm = true_residual(a, shift, b, res.x, r);
  // The recursive residual drifts from the true one; re-anchor a few times.
  for (int restart = 0; restart < 4 && rnorm > target; ++restart) {
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    p = z;
    double rz = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
    while (res.iterations < cap) {
      ++res.iterations;
      a.multiply(p, q, shift);
      const double curvature = std::inner_product(p.begin(), p.end(), q.begin(), 0.0);
      if (!(curvature > 0.0)) {
        std::ostringstream msg;
        msg << "solve_spd: breakdown, non-positive curvature " << curvature << " at iteration "
            << res.iterations << " (matrix not positive definite)";
        throw SolverError(SolverError::Kind::Breakdown, msg.str());
      }
      const double alpha = rz / curvature;
      for (std::size_t i = 0; i < n; ++i) {
        res.x[i] += alpha * p[i];
        r[i] -= alpha * q[i];
      }
      if (norm2(r) <= 0.5 * target) break;
      for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
      const double rz_new = std::inner_product(r.begin(), r.end(), z.begin(), 0.0);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    rnorm = true_residual(a, shift, b, res.x, r);
    if (res.iterations >= cap) break;
  }
  res.residual_norm = rnorm;
  if (!(rnorm <= target)) {
    std::ostringstream msg;
    msg << "solve_spd: not converged after " << res.iterations << " iterations, residual " << rnorm
        << " > " << target;
    throw SolverError(SolverError::Kind::NotConverged, msg.str());
  }
  return res;
}

}  // namespace p1fv
