#pragma once

// Fixture meshes, random generators and dense oracles shared by the tests.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "p1fv/linalg.hpp"
#include "p1fv/mesh.hpp"
#include "p1fv/field.hpp"
#include "p1fv/operators.hpp"

namespace p1fv::test {

inline const double kSqrt3 = std::sqrt(3.0);

/// (0,0), (1,0), (0.5, sqrt3/2).
inline Mesh single_equilateral() {
  return Mesh({{0.0, 0.0}, {1.0, 0.0}, {0.5, kSqrt3 / 2.0}}, {{0, 1, 2}});
}

/// Two unit equilateral triangles sharing the edge (0,0)-(1,0).
inline Mesh two_equilateral() {
  return Mesh({{0.0, 0.0}, {1.0, 0.0}, {0.5, kSqrt3 / 2.0}, {0.5, -kSqrt3 / 2.0}}, {{0, 1, 2}, {1, 0, 3}});
}

/// Unit square split along the diagonal: both circumcenters sit at its midpoint.
inline Mesh right_triangle_pair() {
  return Mesh({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}, {{0, 1, 2}, {0, 2, 3}});
}

inline std::string right_triangle_pair_text() {
  return "# unit square cut along its diagonal\n4 2\n0 0\n1 0\n1 1\n0 1\n0 1 2\n0 2 3\n";
}

/// The five meshes of the operator checks.
inline std::vector<Mesh> identity_meshes() {
  std::vector<Mesh> meshes;
  meshes.push_back(single_equilateral());
  meshes.push_back(two_equilateral());
  meshes.push_back(rectangle_mesh(8, 8));
  meshes.push_back(rectangle_mesh(16, 16));
  meshes.push_back(rectangle_mesh(32, 32));
  return meshes;
}

/// Small admissible meshes (<= 8 cells) for dense oracles.
inline std::vector<Mesh> small_meshes() {
  std::vector<Mesh> meshes;
  meshes.push_back(single_equilateral());
  meshes.push_back(two_equilateral());
  meshes.push_back(equilateral_mesh(2, 1));
  meshes.push_back(equilateral_mesh(2, 2));
  meshes.push_back(refine_uniform(two_equilateral()));
  meshes.push_back(rectangle_mesh(1, 1));
  meshes.push_back(rectangle_mesh(2, 2, 1.0, 0.7));
  return meshes;
}

/// Hand-rolled generator of random cell fields with varied shapes.
class FieldGenerator {
 public:
  explicit FieldGenerator(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  /// Shapes cycle through: signed uniform, nonnegative, wide magnitude,
  /// offset constant plus noise, sparse spikes.
  std::vector<double> field(std::size_t n) {
    std::vector<double> v(n);
    const int shape = static_cast<int>(count_++ % 5);
    const double scale = std::pow(10.0, uniform(-3.0, 3.0));
    const double offset = uniform(-5.0, 5.0);
    for (double& x : v) {
      switch (shape) {
        case 0: x = uniform(-1.0, 1.0); break;
        case 1: x = uniform(0.0, 1.0); break;
        case 2: x = scale * uniform(-1.0, 1.0); break;
        case 3: x = offset + uniform(-1.0, 1.0); break;
        default: x = uniform(0.0, 1.0) < 0.2 ? uniform(-3.0, 3.0) : 0.0; break;
      }
    }
    if (shape == 4 && n > 0) v[index(n)] = 1.0;  // never all zero
    return v;
  }

  std::vector<double> nonnegative(std::size_t n, double hi = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(0.0, hi);
    return v;
  }

 private:
  std::mt19937_64 rng_;
  std::size_t count_ = 0;
};

inline Eigen::MatrixXd dense(const SparseSpdMatrix& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(a.dim()), static_cast<Eigen::Index>(a.dim()));
  for (std::size_t i = 0; i < a.dim(); ++i) {
    for (std::size_t p = a.row_start()[i]; p < a.row_start()[i + 1]; ++p) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(a.col_index()[p])) = a.values()[p];
    }
  }
  return m;
}

inline Eigen::VectorXd vec(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Squared time translate by the midpoint rule on the dt / lattice grid.
/// Exact when tau is a multiple of the grid step, since the integrand is
/// then constant on every grid cell.
inline double translate_oracle(const Discretization& disc, const SpaceTimeField& f, double tau, int lattice) {
  const double dt = f.dt();
  const double h = dt / lattice;
  const long n_steps = static_cast<long>(f.num_intervals());
  const auto at = [&](double t, std::size_t k) {
    const long n = static_cast<long>(std::floor(t / dt));
    return (n < 0 || n >= n_steps) ? 0.0 : f[static_cast<std::size_t>(n)][k];
  };
  const double a = -std::abs(tau) - dt, b = f.final_time() + std::abs(tau) + dt;
  const long m = static_cast<long>(std::ceil((b - a) / h));
  double sum = 0.0;
  for (long i = 0; i < m; ++i) {
    const double t = a + (static_cast<double>(i) + 0.5) * h;
    for (std::size_t k = 0; k < disc.num_cells(); ++k) {
      const double d = at(t + tau, k) - at(t, k);
      sum += disc.laplacians().mass[k] * d * d * h;
    }
  }
  return sum;
}

/// Relative difference with a floor for values near zero.
inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace p1fv::test
