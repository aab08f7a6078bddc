#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "p1fv/diagnostics.hpp"
#include "p1fv/error.hpp"
#include "p1fv/scheme.hpp"
#include "support.hpp"

using namespace p1fv;
using p1fv::test::kSqrt3;

namespace {

// Root of g on [lo, hi] by bisection, g(lo) < 0 < g(hi).
template <class G>
double bisect(G g, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SchemeConfig small_config(InitialCondition u0, double dt = 0.01, double final_time = 0.1) {
  SchemeConfig cfg;
  cfg.dt = dt;
  cfg.final_time = final_time;
  cfg.u0 = std::move(u0);
  return cfg;
}

double integral(const Discretization& disc, const CellField& f, int power = 1) {
  double s = 0.0;
  for (std::size_t k = 0; k < disc.num_cells(); ++k) s += disc.laplacians().mass[k] * std::pow(f[k], power);
  return s;
}

}  // namespace

TEST(InitState, UniformTemperature) {
  const Discretization disc(rectangle_mesh(4, 4));
  for (double c : {1.0, 0.5, 2.0}) {
    const State s = init_state(disc, small_config(InitialCondition::uniform(c)));
    for (std::size_t k = 0; k < disc.num_cells(); ++k) {
      EXPECT_EQ(s.u[k], c);
      EXPECT_NEAR(s.phi[k], std::pow(c, 4), 1e-12 * std::pow(c, 4));
    }
    EXPECT_EQ(s.n, 0u);
    EXPECT_EQ(s.t, 0.0);
    EXPECT_EQ(s.u_bar0, c);
  }
}

TEST(InitState, TwoCellIndicator) {
  // (|K| + A_N) phi = |K| u^4 with |K| = sqrt3/4 and A_N = sqrt3 [[1,-1],[-1,1]]:
  // the sum of phi is 1 and the difference solves (1/4 + 2) d = 1/4.
  const Discretization disc(test::two_equilateral());
  const State s = init_state(disc, small_config(InitialCondition::from_cells({1.0, 0.0})));
  EXPECT_NEAR(s.phi[0], 5.0 / 9.0, 1e-12);
  EXPECT_NEAR(s.phi[1], 4.0 / 9.0, 1e-12);
}

TEST(InitState, NegativeInitialDataIsRejected) {
  const Discretization disc(rectangle_mesh(3, 3));
  EXPECT_THROW(init_state(disc, small_config(InitialCondition::uniform(-1.0))), ConfigError);
  std::vector<double> cells(disc.num_cells(), 1.0);
  cells[4] = -1e-3;
  EXPECT_THROW(init_state(disc, small_config(InitialCondition::from_cells(cells))), ConfigError);
  EXPECT_THROW(init_state(disc, small_config(InitialCondition::from_function([](Point2 p) { return p.x - 0.1; }))),
               ConfigError);
}

TEST(InitState, WrongCellCountIsRejected) {
  const Discretization disc(rectangle_mesh(3, 3));
  EXPECT_THROW(init_state(disc, small_config(InitialCondition::from_cells({1.0, 2.0}))), Error);
}

TEST(SchemeConfig, Validation) {
  SchemeConfig cfg;
  cfg.dt = 0.03;
  cfg.final_time = 0.1;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.dt = -0.01;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.dt = 0.01;
  cfg.newton_tol = 0.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg.newton_tol = 1e-12;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.num_steps(), 10u);
}

TEST(AdvanceU, SingleCellMatchesScalarRoot) {
  // dt = 1, u^0 = phi^0 = 1, Delta_D u = -24 u: u - 1 + 24 u + u^4 - 1 = 0.
  const Discretization disc(test::single_equilateral());
  for (NonlinearSolver solver : {NonlinearSolver::Newton, NonlinearSolver::Picard}) {
    SchemeConfig cfg = small_config(InitialCondition::uniform(1.0), 1.0, 1.0);
    cfg.nonlinear_solver = solver;
    const State s = init_state(disc, cfg);
    ASSERT_NEAR(s.phi[0], 1.0, 1e-15);
    const CellField u1 = advance_u(disc, s, cfg);
    const double root = bisect([](double u) { return 25 * u + u * u * u * u - 2.0; }, 0.0, 1.0);
    EXPECT_NEAR(u1[0], root, 1e-13);
  }
}

TEST(AdvanceU, ResidualBelowTolerance) {
  const Discretization disc(rectangle_mesh(8, 8));
  SchemeConfig cfg = small_config(bump_initial(disc.mesh()));
  const State s = init_state(disc, cfg);
  StepStats stats;
  const CellField u1 = advance_u(disc, s, cfg, &stats);
  const std::vector<double> r = scaled_residual(disc, s, cfg, u1.values());
  double worst = 0.0;
  for (double v : r) worst = std::max(worst, std::abs(v));
  EXPECT_LE(worst, cfg.newton_tol);
  EXPECT_NEAR(stats.nonlinear_residual, worst, cfg.newton_tol);
  EXPECT_GE(stats.nonlinear_iterations, 1u);
}

TEST(Run, ZeroStaysZero) {
  const Discretization disc(rectangle_mesh(4, 4));
  const Trajectory t = run(disc, small_config(InitialCondition::uniform(0.0)));
  ASSERT_EQ(t.u.num_intervals(), 10u);
  ASSERT_EQ(t.stats.size(), 11u);
  for (std::size_t n = 0; n <= 10; ++n) {
    for (std::size_t k = 0; k < disc.num_cells(); ++k) {
      EXPECT_EQ(t.u[n][k], 0.0);
      EXPECT_EQ(t.phi[n][k], 0.0);
    }
  }
}

TEST(Run, UniformDataDecaysMonotonically) {
  const Discretization disc(rectangle_mesh(8, 8));
  const Trajectory t = run(disc, small_config(InitialCondition::uniform(1.0)));
  for (std::size_t n = 1; n <= t.u.num_intervals(); ++n) {
    EXPECT_LE(t.u[n].max(), t.u[n - 1].max());
    EXPECT_GE(t.u[n].min(), 0.0);
    EXPECT_GE(t.phi[n].min(), 0.0);
    EXPECT_LE(t.phi[n].max(), std::pow(t.u[n].max(), 4) * (1 + 1e-12));
  }
}

TEST(Run, IntensityMeanMatchesFourthPower) {
  const Discretization disc(rectangle_mesh(8, 8));
  const Trajectory t = run(disc, small_config(bump_initial(disc.mesh())));
  for (std::size_t n = 0; n <= t.u.num_intervals(); ++n) {
    const double a = integral(disc, t.phi[n]), b = integral(disc, t.u[n], 4);
    EXPECT_LE(std::abs(a - b), 1e-10 * b);
  }
  EXPECT_LE(mean_identity_defect(disc, t.u, t.phi), 1e-10);
}

TEST(Run, NewtonAndPicardAgree) {
  const Discretization disc(rectangle_mesh(8, 8));
  SchemeConfig newton = small_config(bump_initial(disc.mesh()));
  SchemeConfig picard = newton;
  picard.nonlinear_solver = NonlinearSolver::Picard;
  const Trajectory a = run(disc, newton), b = run(disc, picard);
  for (std::size_t n = 0; n <= a.u.num_intervals(); ++n) {
    for (std::size_t k = 0; k < disc.num_cells(); ++k) {
      EXPECT_LE(std::abs(a.u[n][k] - b.u[n][k]), 10 * newton.newton_tol * std::max(1.0, a.u_bar0));
    }
  }
}

TEST(Run, JacobianStructureIsChecked) {
  const Discretization disc(equilateral_mesh(4, 4, 0.25));
  SchemeConfig cfg = small_config(bump_initial(disc.mesh()));
  cfg.check_jacobian_structure = true;
  const Trajectory t = run(disc, cfg);
  for (std::size_t n = 1; n < t.stats.size(); ++n) {
    EXPECT_TRUE(t.stats[n].structure_ok);
    EXPECT_GE(t.stats[n].structure_checks, 1u);
  }
}

TEST(Run, MaxPrincipleHoldsOnRandomData) {
  test::FieldGenerator gen(41);
  for (const Mesh& m : test::small_meshes()) {
    const Discretization disc(m);
    for (int trial = 0; trial < 3; ++trial) {
      const Trajectory t = run(disc, small_config(InitialCondition::from_cells(gen.nonnegative(m.num_cells(), 3.0)),
                                                  0.05, 0.5));
      EXPECT_TRUE(check_max_principle(t.u, t.phi).passed);
    }
  }
}

TEST(Step, AdvancesTimeAndIndex) {
  const Discretization disc(rectangle_mesh(3, 3));
  const SchemeConfig cfg = small_config(InitialCondition::uniform(1.0));
  const State s0 = init_state(disc, cfg);
  const State s1 = step(disc, s0, cfg);
  EXPECT_EQ(s1.n, 1u);
  EXPECT_NEAR(s1.t, 0.01, 1e-16);
  EXPECT_EQ(s1.u_bar0, s0.u_bar0);
}

TEST(Bump, ProfileShape) {
  const Mesh m = rectangle_mesh(4, 4, 2.0, 1.0);
  const PointFunction f = bump_profile(m);
  EXPECT_DOUBLE_EQ(f({1.0, 0.5}), 1.0);
  EXPECT_EQ(f({0.0, 0.0}), 0.0);
  // r = 1/4, half way out: 1 - 4 (1/8)^2 / (1/4)^2 = 0.
  EXPECT_NEAR(f({1.125, 0.5}), 0.0, 1e-15);
  EXPECT_NEAR(f({1.0625, 0.5}), 0.75, 1e-15);
}
