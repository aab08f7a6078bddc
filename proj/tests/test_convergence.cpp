#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "p1fv/convergence.hpp"
#include "p1fv/error.hpp"
#include "support.hpp"

using namespace p1fv;

namespace {

SpaceTimeField constant_trajectory(const Discretization& disc, double value, std::size_t steps, double final_time) {
  std::vector<CellField> fs(steps + 1, CellField::constant(disc.mesh_ptr(), value));
  return SpaceTimeField(std::move(fs), final_time / static_cast<double>(steps), final_time);
}

std::vector<double> coarse_areas(const MeshOverlay& overlay, std::size_t n) {
  std::vector<double> a(n, 0.0);
  for (const auto& p : overlay.pieces) a[p.coarse] += p.area;
  return a;
}

SchemeConfig study_config(InitialCondition u0, double dt, double final_time) {
  SchemeConfig cfg;
  cfg.dt = dt;
  cfg.final_time = final_time;
  cfg.u0 = std::move(u0);
  return cfg;
}

}  // namespace

TEST(Overlay, NestedMeshesGiveInjection) {
  const Mesh coarse = equilateral_mesh(2, 2);
  const Mesh fine = refine_uniform(coarse);
  const MeshOverlay ov = overlay_meshes(coarse, fine);
  EXPECT_EQ(ov.pieces.size(), fine.num_cells());
  test::FieldGenerator gen(71);
  const std::vector<double> c = gen.field(coarse.num_cells());
  const std::vector<double> f = transfer_to_fine(ov, c, fine.num_cells());
  for (std::size_t k = 0; k < fine.num_cells(); ++k) EXPECT_NEAR(f[k], c[k / 4], 1e-14 * (1 + std::abs(c[k / 4])));
  EXPECT_NEAR(overlay_l2_diff_sq(ov, c, f), 0.0, 1e-28);
}

TEST(Overlay, NonNestedAreasAddUp) {
  const Mesh coarse = rectangle_mesh(3, 3), fine = rectangle_mesh(5, 4);
  const MeshOverlay ov = overlay_meshes(coarse, fine);
  EXPECT_NEAR(ov.total_area, 1.0, 1e-13);
  const std::vector<double> a = coarse_areas(ov, coarse.num_cells());
  for (CellIndex k = 0; k < coarse.num_cells(); ++k) EXPECT_NEAR(a[k], triangle_area(coarse.cell_triangle(k)), 1e-13);
}

TEST(Overlay, ConstantFieldsDifference) {
  const Mesh coarse = rectangle_mesh(3, 3), fine = rectangle_mesh(6, 6);
  const MeshOverlay ov = overlay_meshes(coarse, fine);
  const std::vector<double> c(coarse.num_cells(), 2.0), f(fine.num_cells(), 0.5);
  EXPECT_NEAR(overlay_l2_diff_sq(ov, c, f), 2.25, 1e-12);
  const std::vector<double> t = transfer_to_fine(ov, c, fine.num_cells());
  for (double v : t) EXPECT_NEAR(v, 2.0, 1e-13);
}

TEST(SpacetimeDiff, ConstantTrajectories) {
  const Discretization a(rectangle_mesh(2, 2)), b(rectangle_mesh(4, 4));
  const MeshOverlay ov = overlay_meshes(a.mesh(), b.mesh());
  const SpaceTimeField fa = constant_trajectory(a, 1.0, 5, 0.5), fb = constant_trajectory(b, 1.5, 10, 0.5);
  EXPECT_NEAR(spacetime_l2_diff(ov, fa, fb), 0.5 * std::sqrt(0.5), 1e-13);
  EXPECT_THROW(spacetime_l2_diff(ov, fa, constant_trajectory(b, 1.5, 5, 0.5)), MeshMismatchError);
}

TEST(SpacetimeDiff, UsesEndOfIntervalValues) {
  // Coarse u^1 on (0, T]; the fine steps u^1, u^2 on the two halves.
  const Discretization a(test::single_equilateral());
  const MeshOverlay ov = overlay_meshes(a.mesh(), a.mesh());
  const SpaceTimeField coarse({a.field({7.0}), a.field({1.0})}, 1.0, 1.0);
  const SpaceTimeField fine({a.field({-4.0}), a.field({2.0}), a.field({3.0})}, 0.5, 1.0);
  const double area = a.laplacians().mass[0];
  EXPECT_NEAR(spacetime_l2_diff(ov, coarse, fine), std::sqrt(0.5 * area * (1.0 + 4.0)), 1e-14);
}

TEST(SpacetimeError, AgainstConstantExactSolution) {
  const Discretization disc(rectangle_mesh(3, 3));
  const SpaceTimeField f = constant_trajectory(disc, 3.0, 4, 0.2);
  const double e = spacetime_l2_error(disc, f, [](Point2, double) { return 1.0; }, QuadratureRule::edge_midpoint());
  EXPECT_NEAR(e, 2.0 * std::sqrt(0.2), 1e-13);
}

TEST(Manufactured, SourcesMatchFiniteDifferenceResidual) {
  const ManufacturedProblem mp = unit_square_manufactured();
  const double h = 1e-4;
  test::FieldGenerator gen(72);
  for (int i = 0; i < 50; ++i) {
    const Point2 p{gen.uniform(0.05, 0.95), gen.uniform(0.05, 0.95)};
    const double t = gen.uniform(0.0, 1.0);
    const auto lap = [&](const SpaceTimeFunction& f) {
      return (f({p.x + h, p.y}, t) + f({p.x - h, p.y}, t) + f({p.x, p.y + h}, t) + f({p.x, p.y - h}, t) -
              4 * f(p, t)) /
             (h * h);
    };
    const double u = mp.exact.u(p, t), phi = mp.exact.phi(p, t);
    const double ut = (mp.exact.u(p, t + h) - mp.exact.u(p, t - h)) / (2 * h);
    const double fu = ut - lap(mp.exact.u) + std::pow(u, 4) - phi;
    const double fphi = phi - lap(mp.exact.phi) - std::pow(u, 4);
    EXPECT_NEAR(mp.sources.f_u(p, t), fu, 1e-5 * (1 + std::abs(fu)));
    EXPECT_NEAR(mp.sources.f_phi(p, t), fphi, 1e-5 * (1 + std::abs(fphi)));
  }
}

TEST(Manufactured, BoundaryConditions) {
  const ManufacturedProblem mp = unit_square_manufactured();
  const double h = 1e-6;
  for (double s : {0.1, 0.4, 0.77}) {
    for (double t : {0.0, 0.5}) {
      EXPECT_EQ(mp.exact.u({0.0, s}, t), 0.0);
      EXPECT_EQ(mp.exact.u({s, 1.0}, t), 0.0);
      // Zero normal derivative of phi on x = 0 and y = 1.
      EXPECT_NEAR((mp.exact.phi({h, s}, t) - mp.exact.phi({0.0, s}, t)) / h, 0.0, 1e-4);
      EXPECT_NEAR((mp.exact.phi({s, 1.0}, t) - mp.exact.phi({s, 1.0 - h}, t)) / h, 0.0, 1e-4);
    }
  }
}

TEST(ConvergenceStudy, RequiresTwoLevels) {
  ConvergenceOptions opt;
  opt.levels = 1;
  EXPECT_THROW(convergence_study(rectangle_levels(2), study_config(InitialCondition::uniform(1.0), 0.05, 0.1), opt),
               ConfigError);
}

TEST(ConvergenceStudy, ZeroDataGivesZeroDifferences) {
  ConvergenceOptions opt;
  opt.levels = 3;
  const ConvergenceTable t =
      convergence_study(rectangle_levels(2), study_config(InitialCondition::uniform(0.0), 0.05, 0.1), opt);
  ASSERT_EQ(t.levels.size(), 3u);
  ASSERT_EQ(t.cauchy.size(), 2u);
  for (const CauchyRow& r : t.cauchy) {
    EXPECT_EQ(r.diff_u, 0.0);
    EXPECT_EQ(r.diff_phi, 0.0);
  }
}

TEST(ConvergenceStudy, LevelsHalveStepAndMesh) {
  ConvergenceOptions opt;
  opt.levels = 3;
  const ConvergenceTable t =
      convergence_study(rectangle_levels(4), study_config(InitialCondition::uniform(1.0), 0.02, 0.1), opt);
  for (std::size_t m = 1; m < t.levels.size(); ++m) {
    EXPECT_NEAR(t.levels[m].dt, 0.5 * t.levels[m - 1].dt, 1e-16);
    EXPECT_EQ(t.levels[m].num_steps, 2 * t.levels[m - 1].num_steps);
    EXPECT_NEAR(t.levels[m].h, 0.5 * t.levels[m - 1].h, 1e-14);
  }
  EXPECT_TRUE(t.strictly_decreasing());
  EXPECT_GT(t.last_ratio_u(), 0.0);
  EXPECT_LT(t.last_ratio_u(), 1.0);
}

TEST(ConvergenceStudy, ParallelMatchesSerial) {
  ConvergenceOptions opt;
  opt.levels = 3;
  const SchemeConfig cfg = study_config(InitialCondition::uniform(1.0), 0.02, 0.06);
  const ConvergenceTable serial = convergence_study(rectangle_levels(3), cfg, opt);
  opt.parallel_levels = true;
  const ConvergenceTable parallel = convergence_study(rectangle_levels(3), cfg, opt);
  ASSERT_EQ(serial.cauchy.size(), parallel.cauchy.size());
  for (std::size_t i = 0; i < serial.cauchy.size(); ++i) {
    EXPECT_EQ(serial.cauchy[i].diff_u, parallel.cauchy[i].diff_u);
    EXPECT_EQ(serial.cauchy[i].diff_phi, parallel.cauchy[i].diff_phi);
  }
}

TEST(ConvergenceStudy, ManufacturedErrorsDecrease) {
  const ManufacturedProblem mp = unit_square_manufactured();
  SchemeConfig cfg = study_config(mp.u0, 0.02, 0.1);
  cfg.sources = mp.sources;
  ConvergenceOptions opt;
  opt.levels = 3;
  opt.exact = mp.exact;
  const ConvergenceTable t = convergence_study(rectangle_levels(4), cfg, opt);
  EXPECT_TRUE(t.manufactured);
  for (std::size_t m = 1; m < t.levels.size(); ++m) {
    EXPECT_LT(t.levels[m].error_u, t.levels[m - 1].error_u);
    EXPECT_LT(t.levels[m].error_phi, t.levels[m - 1].error_phi);
  }
  EXPECT_GT(t.order_u(), 0.5);
}

TEST(ConvergenceStudy, RefinementLevelsOfEquilateralMesh) {
  const ConvergenceTable t =
      convergence_study(equilateral_mesh(2, 2, 0.5), study_config(InitialCondition::uniform(1.0), 0.02, 0.04), 2);
  ASSERT_EQ(t.levels.size(), 2u);
  EXPECT_EQ(t.levels[1].num_cells, 4 * t.levels[0].num_cells);
}

TEST(ConvergenceTable, CsvHasOneRowPerLevel) {
  ConvergenceOptions opt;
  opt.levels = 2;
  const ConvergenceTable t =
      convergence_study(rectangle_levels(2), study_config(InitialCondition::uniform(1.0), 0.05, 0.1), opt);
  std::istringstream in(t.to_csv());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "level,cells,h,dt,steps,seconds,diff_u,diff_phi,ratio_u,ratio_phi,error_u,error_phi");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 2u);
}
