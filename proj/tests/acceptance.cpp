// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "p1fv/convergence.hpp"
#include "p1fv/diagnostics.hpp"
#include "p1fv/discrete_space.hpp"
#include "p1fv/linalg.hpp"
#include "p1fv/scheme.hpp"
#include "support.hpp"

using namespace p1fv;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Run {
  std::string label;
  std::shared_ptr<const Discretization> disc;
  Trajectory traj;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

SchemeConfig scheme_config(InitialCondition u0, double dt, double final_time) {
  SchemeConfig cfg;
  cfg.dt = dt;
  cfg.final_time = final_time;
  cfg.u0 = std::move(u0);
  return cfg;
}

// 16x16 runs with u0 in {1, bump} and dt in {0.01, 0.001}, T = 0.5.
std::vector<Run> acceptance_runs() {
  auto disc = std::make_shared<const Discretization>(rectangle_mesh(16, 16));
  std::vector<Run> runs;
  for (double dt : {0.01, 0.001}) {
    runs.push_back({fmt("u0=1 dt=%g", dt), disc, run(*disc, scheme_config(InitialCondition::uniform(1.0), dt, 0.5))});
    runs.push_back({fmt("bump dt=%g", dt), disc, run(*disc, scheme_config(bump_initial(disc->mesh()), dt, 0.5))});
  }
  return runs;
}

Outcome operator_identities() {
  const auto start = Clock::now();
  double worst = 0.0;
  bool rows = true, ok = true;
  std::uint64_t seed = 1001;
  for (const Mesh& m : test::identity_meshes()) {
    const Discretization disc(m);
    const OperatorIdentityReport r = check_operator_identities(disc, 1000, seed++, 1e-12);
    worst = std::max({worst, r.max_rel_dirichlet, r.max_rel_neumann});
    rows = rows && r.neumann_rows_zero;
    ok = ok && r.identities_ok;
  }
  const double secs = seconds_since(start);
  return {ok && rows && secs < 5.0,
          fmt("5 meshes x 1000 fields, max rel %.2e <= 1e-12, neumann row sums zero %s, %.2f s < 5 s", worst,
              rows ? "yes" : "no", secs)};
}

Outcome max_principle(const std::vector<Run>& runs, double seconds) {
  bool ok = true;
  std::string fails;
  for (const Run& r : runs) {
    const MaxPrincipleReport rep = check_max_principle(r.traj, 1e-10);
    if (!rep.passed) {
      ok = false;
      fails += " [" + r.label + ": " + rep.summary() + "]";
    }
  }
  return {ok && seconds < 30.0, fmt("%zu runs on 16x16, T = 0.5, %.2f s < 30 s", runs.size(), seconds) + fails};
}

Outcome newton_picard(const Run& bump) {
  const auto start = Clock::now();
  SchemeConfig cfg = scheme_config(bump_initial(bump.disc->mesh()), bump.traj.u.dt(), bump.traj.u.final_time());
  cfg.nonlinear_solver = NonlinearSolver::Picard;
  const Trajectory picard = run(*bump.disc, cfg);
  double worst = 0.0;
  for (std::size_t n = 0; n <= picard.u.num_intervals(); ++n) {
    for (std::size_t k = 0; k < bump.disc->num_cells(); ++k) {
      worst = std::max(worst, std::abs(picard.u[n][k] - bump.traj.u[n][k]));
    }
  }
  const double limit = 10 * cfg.newton_tol;
  const double secs = seconds_since(start);
  return {worst <= limit && secs < 60.0,
          fmt("%s: max |u_newton - u_picard| = %.2e <= %.0e, %.2f s < 60 s", bump.label.c_str(), worst, limit, secs)};
}

Outcome mean_identity(const std::vector<Run>& runs) {
  double worst = 0.0;
  for (const Run& r : runs) worst = std::max(worst, mean_identity_defect(*r.disc, r.traj.u, r.traj.phi));
  return {worst <= 1e-10, fmt("%zu runs, max relative defect %.2e <= 1e-10", runs.size(), worst)};
}

Outcome energy(const std::vector<Run>& runs) {
  bool ok = true;
  double worst_margin = -1e300;
  for (const Run& r : runs) {
    const EnergyReport rep = energy_budget(*r.disc, r.traj);
    for (const EnergyStep& s : rep.steps) {
      worst_margin = std::max(worst_margin, s.l2_lhs - s.l2_rhs);
      ok = ok && s.l2_lhs <= s.l2_rhs + 1e-8;
    }
    for (double v : {rep.l2_h1_u, rep.hminus1_dt_u, rep.l2_phi, rep.l2_h1_semi_phi, rep.l2_dt_phi}) {
      ok = ok && std::isfinite(v);
    }
  }
  return {ok, fmt("%zu runs, max (lhs - rhs) of the per-step inequality %.3e <= 1e-8, five terms finite", runs.size(),
                  worst_margin)};
}

Outcome time_translates(const std::vector<Run>& runs) {
  bool ok = true;
  std::size_t checks = 0;
  for (const Run& r : runs) {
    const double dt = r.traj.u.dt(), t_end = r.traj.u.final_time();
    for (double tau : {dt / 2, dt, 3.7 * dt, t_end / 3}) {
      const TranslateReport u = time_translate_sq(*r.disc, r.traj.u, tau, NormKind::DirichletH1);
      const TranslateReport phi = time_translate_sq(*r.disc, r.traj.phi, tau, NormKind::L2);
      ok = ok && u.passed && phi.passed;
      checks += 2;
    }
  }
  // Oracle: T = 0.48 and dt = 0.01 put every shift on the dt/64 lattice;
  // 237 dt/64 stands in for 3.7 dt.
  const Discretization two(test::two_equilateral());
  const Trajectory t = run(two, scheme_config(InitialCondition::from_cells({1.0, 0.25}), 0.01, 0.48));
  double worst = 0.0;
  for (double tau : {0.005, 0.01, 237 * 0.01 / 64, 0.16}) {
    for (const SpaceTimeField* f : {&t.u, &t.phi}) {
      worst = std::max(worst, test::rel_diff(time_translate_lhs(two, *f, tau), test::translate_oracle(two, *f, tau, 64)));
    }
    ok = ok && time_translate_sq(two, t.u, tau, NormKind::DirichletH1).passed &&
         time_translate_sq(two, t.phi, tau, NormKind::L2).passed;
  }
  return {ok && worst <= 1e-6,
          fmt("%zu bound checks, 2-cell oracle max rel diff %.2e <= 1e-6", checks, worst)};
}

Outcome chi() {
  test::FieldGenerator gen(707);
  bool ok = true;
  double worst_err = 0.0, worst_window = 0.0;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 1 + gen.index(60);
    const double dt = gen.uniform(1e-3, 0.5);
    const double tau = gen.uniform(0.0, static_cast<double>(n) * dt);
    const std::vector<double> alphas = gen.field(n);
    const ChiIdentities c = chi_identities(n, dt, tau, alphas, 1000, 1e-14);
    double scale = 0.0;
    for (double a : alphas) scale += std::abs(a);
    worst_err = std::max(worst_err, std::abs(c.integral - c.formula) / std::max(tau * scale, 1e-300));
    worst_window = std::max(worst_window, c.window_max / std::max(tau, 1e-300));
    ok = ok && c.integral_exact && c.window_bound_ok;
  }
  return {ok, fmt("100 tuples, max rel error %.2e <= 1e-14, max window / tau %.15f over 1000-point sweeps", worst_err,
                  worst_window)};
}

Outcome convergence() {
  const auto start = Clock::now();
  ConvergenceOptions opt;
  opt.levels = 4;
  opt.parallel_levels = true;
  const double dt0 = 0.005;

  const ConvergenceTable bump = convergence_study(
      rectangle_levels(8), scheme_config(InitialCondition::from_function(bump_profile(rectangle_mesh(1, 1)),
                                                                         QuadratureRule::subdivision(3)),
                                         dt0, 0.5),
      opt);

  const ManufacturedProblem mp = unit_square_manufactured();
  SchemeConfig mcfg = scheme_config(mp.u0, dt0, 0.5);
  mcfg.sources = mp.sources;
  opt.exact = mp.exact;
  const ConvergenceTable manu = convergence_study(rectangle_levels(8), mcfg, opt);
  const double secs = seconds_since(start);

  std::ostringstream diffs;
  for (const CauchyRow& r : bump.cauchy) diffs << (r.level ? ", " : "") << fmt("%.4e", r.diff_u);
  const bool ok = bump.strictly_decreasing() && bump.last_ratio_u() <= 0.7 && manu.order_u() >= 1.0 && secs < 600;
  return {ok, fmt("levels 8..64, dt0 = %g: bump Cauchy diffs [", dt0) + diffs.str() +
                  fmt("] strictly decreasing %s, last ratio %.4f <= 0.7; manufactured order_u %.4f >= 1.0 "
                      "(order_phi %.4f); %.1f s < 600 s",
                      bump.strictly_decreasing() ? "yes" : "no", bump.last_ratio_u(), manu.order_u(),
                      manu.order_phi(), secs)};
}

Outcome poincare() {
  double worst = 0.0;
  std::uint64_t seed = 9001;
  for (const Mesh& m : test::identity_meshes()) {
    const Discretization disc(m);
    worst = std::max(worst, check_operator_identities(disc, 1000, seed++).max_poincare_ratio);
  }
  return {worst < 1.0, fmt("5 meshes x 1000 fields, max ||psi|| / (diam ||psi||_1M) = %.4f < 1", worst)};
}

Outcome dense_oracles() {
  test::FieldGenerator gen(1010);
  double worst_dual = 0.0, worst_solve = 0.0;
  std::size_t meshes = 0;
  for (const Mesh& m : test::small_meshes()) {
    if (m.num_cells() > 8) continue;
    ++meshes;
    const Discretization disc(m);
    const Eigen::MatrixXd a = test::dense(disc.laplacians().dirichlet);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
    for (int trial = 0; trial < 50; ++trial) {
      const std::vector<double> u = gen.field(m.num_cells());
      // sup over v of (Mu, v) / sqrt(v'Av) from the eigendecomposition.
      const Eigen::VectorXd mu = test::vec(disc.laplacians().mass).cwiseProduct(test::vec(u));
      const Eigen::VectorXd c = eig.eigenvectors().transpose() * mu;
      const double oracle = std::sqrt((c.array().square() / eig.eigenvalues().array()).sum());
      worst_dual = std::max(worst_dual, test::rel_diff(dual_norm_minus1(disc, disc.field(u)), oracle));
    }
  }
  for (const Mesh& m : test::identity_meshes()) {
    const Discretization disc(m);
    const Eigen::MatrixXd a = test::dense(disc.laplacians().dirichlet);
    const auto ldlt = a.ldlt();
    for (int trial = 0; trial < 5; ++trial) {
      const std::vector<double> b = gen.field(m.num_cells());
      const SolveResult r = solve_spd(disc.laplacians().dirichlet, b, {1e-13, 1e-300, 0});
      const Eigen::VectorXd ref = ldlt.solve(test::vec(b));
      worst_solve = std::max(worst_solve, (test::vec(r.x) - ref).norm() / ref.norm());
    }
  }
  return {worst_dual <= 1e-8 && worst_solve <= 1e-10,
          fmt("dual norm vs eigen oracle on %zu meshes max rel %.2e <= 1e-8; solve_spd vs dense LDLT max rel %.2e "
              "<= 1e-10",
              meshes, worst_dual, worst_solve)};
}

}  // namespace

int main() {
  int failed = 0;
  const auto report = [&](int id, const char* name, const Outcome& o, double secs) {
    std::printf("criterion %2d %-22s %s  %s [%.2f s]\n", id, name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  };
  const auto timed = [&](int id, const char* name, const std::function<Outcome()>& f) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    report(id, name, o, seconds_since(start));
  };

  timed(1, "operator-identities", operator_identities);

  const auto start = Clock::now();
  std::vector<Run> runs;
  try {
    runs = acceptance_runs();
  } catch (const std::exception& e) {
    for (int id = 2; id <= 6; ++id) report(id, "scheme-runs", {false, std::string("exception: ") + e.what()}, 0.0);
  }
  if (!runs.empty()) {
    const double run_secs = seconds_since(start);
    timed(2, "max-principle", [&] { return max_principle(runs, run_secs); });
    timed(3, "newton-vs-picard", [&] { return newton_picard(runs[1]); });
    timed(4, "mean-identity", [&] { return mean_identity(runs); });
    timed(5, "energy", [&] { return energy(runs); });
    timed(6, "time-translates", [&] { return time_translates(runs); });
  }
  timed(7, "chi-identities", chi);
  timed(8, "convergence", convergence);
  timed(9, "poincare", poincare);
  timed(10, "dense-oracles", dense_oracles);

  std::printf("acceptance: %d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
