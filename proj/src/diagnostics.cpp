#include "p1fv/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "p1fv/error.hpp"

namespace p1fv {

namespace {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

bool within(double lhs, double rhs, double magnitude, double abs_slack, double rel_slack) {
  return lhs <= rhs + abs_slack + rel_slack * magnitude;
}

double pow4(double x) { return (x * x) * (x * x); }

double diff_l2_sq(const std::vector<double>& mass, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < mass.size(); ++k) {
    const double d = (a.empty() ? 0.0 : a[k]) - (b.empty() ? 0.0 : b[k]);
    s += mass[k] * d * d;
  }
  return s;
}

}  // namespace

MaxPrincipleReport check_max_principle(const SpaceTimeField& u, const SpaceTimeField& phi, double rel_tol) {
  if (u.num_intervals() != phi.num_intervals()) throw MeshMismatchError("u and phi have different step counts");
  require_same_mesh(u[0], phi[0]);
  MaxPrincipleReport report;
  auto fail = [&](std::size_t n, std::size_t k, const std::string& what) {
    if (!report.passed) return;
    report.passed = false;
    report.fail_step = n;
    report.fail_cell = k;
    report.fail_what = what;
  };
  for (std::size_t n = 0; n <= u.num_intervals(); ++n) {
    MaxPrincipleStep s;
    s.n = n;
    const auto un = u[n].values();
    const auto pn = phi[n].values();
    s.u_min = u[n].min();
    s.u_max = u[n].max();
    s.u_bound = n == 0 ? std::max(s.u_max, 0.0) : std::max(u[n - 1].max(), 0.0);
    s.phi_min = phi[n].min();
    s.phi_max = phi[n].max();
    s.phi_bound = pow4(std::max(s.u_max, 0.0));
    const double u_lo = -rel_tol * s.u_bound;
    const double u_hi = s.u_bound * (1.0 + rel_tol);
    const double p_lo = -rel_tol * s.phi_bound;
    const double p_hi = s.phi_bound * (1.0 + rel_tol);
    for (std::size_t k = 0; k < un.size(); ++k) {
      if (un[k] < u_lo) {
        s.u_ok = false;
        fail(n, k, "temperature below zero");
      } else if (un[k] > u_hi) {
        s.u_ok = false;
        fail(n, k, "temperature above the previous maximum");
      }
      if (pn[k] < p_lo) {
        s.phi_ok = false;
        fail(n, k, "intensity below zero");
      } else if (pn[k] > p_hi) {
        s.phi_ok = false;
        fail(n, k, "intensity above (max u)^4");
      }
    }
    report.steps.push_back(s);
  }
  return report;
}

std::string MaxPrincipleReport::summary() const {
  std::ostringstream out;
  out.precision(6);
  out << "max_principle: " << (passed ? "PASS" : "FAIL") << " (" << steps.size() << " time levels)";
  if (!passed) out << ", first violation at step " << fail_step << ", cell " << fail_cell << ": " << fail_what;
  out << '\n';
  return out.str();
}

EnergyReport energy_budget(const Discretization& disc, const SpaceTimeField& u, const SpaceTimeField& phi,
                           const SolverConfig& cfg, double abs_slack, double rel_slack) {
  if (u.num_intervals() != phi.num_intervals()) throw MeshMismatchError("u and phi have different step counts");
  disc.require_owns(u[0]);
  disc.require_owns(phi[0]);
  const std::size_t N = u.num_intervals();
  const double dt = u.dt();
  const auto& g = disc.geometry();

  EnergyReport r;
  r.domain_measure = g.domain_measure;
  r.domain_diameter = g.domain_diameter;
  r.final_time = u.final_time();
  r.u_bar0 = std::max(u[0].max(), 0.0);
  r.norm_1M_u0 = norm_1M(disc, u[0]);
  r.theta = g.theta;
  const double ub4 = pow4(r.u_bar0);
  const double ub8 = ub4 * ub4;
  const double omega = r.domain_measure;
  const double diam = r.domain_diameter;

  std::vector<double> u_l2(N + 1), u_h1(N + 1), phi_l2(N + 1), phi_semi(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    u_l2[n] = l2_inner(disc, u[n], u[n]);
    u_h1[n] = inner_dirichlet(disc, u[n], u[n]);
    phi_l2[n] = l2_inner(disc, phi[n], phi[n]);
    phi_semi[n] = inner_neumann(disc, phi[n], phi[n]);
  }

  double sum_h1 = 0.0, sum_dual = 0.0, sum_phi = 0.0, sum_semi = 0.0, sum_dtphi = 0.0, sum_dtu = 0.0;
  for (std::size_t n = 0; n <= N; ++n) {
    sum_h1 += u_h1[n];
    sum_phi += phi_l2[n];
    sum_semi += phi_semi[n];
  }

  r.phi_rhs = 0.5 * omega * ub8;
  for (std::size_t n = 0; n <= N; ++n) {
    const double lhs = 0.5 * phi_l2[n] + phi_semi[n];
    r.phi_lhs.push_back(lhs);
    if (!within(lhs, r.phi_rhs, lhs + r.phi_rhs, abs_slack, rel_slack)) r.phi_ok = false;
  }

  for (std::size_t n = 0; n < N; ++n) {
    const CellField du = time_difference(u, n);
    const CellField dphi = time_difference(phi, n);
    const double du_l2 = l2_inner(disc, du, du);
    const double du_dual = dual_norm_minus1(disc, du, cfg);
    const double dphi_l2 = l2_inner(disc, dphi, dphi);
    const double dphi_semi = inner_neumann(disc, dphi, dphi);
    sum_dual += du_dual * du_dual;
    sum_dtphi += dphi_l2;
    sum_dtu += du_l2;

    EnergyStep s;
    s.n = n;
    s.l2_lhs = u_l2[n + 1] - u_l2[n] + dt * u_h1[n + 1];
    s.l2_rhs = dt * omega * diam * diam * ub8;
    const bool l2_ok =
        within(s.l2_lhs, s.l2_rhs, u_l2[n + 1] + u_l2[n] + dt * u_h1[n + 1] + s.l2_rhs, abs_slack, rel_slack);
    s.dt_lhs = du_l2 + (u_h1[n + 1] - u_h1[n]) / dt;
    s.dt_rhs = omega * ub8;
    const bool dt_ok =
        within(s.dt_lhs, s.dt_rhs, du_l2 + (u_h1[n + 1] + u_h1[n]) / dt + s.dt_rhs, abs_slack, rel_slack);
    s.dual_lhs = du_dual;
    s.dual_rhs = std::sqrt(u_h1[n + 1]) + ub4 * std::sqrt(omega) * diam;
    const bool dual_ok = within(s.dual_lhs, s.dual_rhs, s.dual_lhs + s.dual_rhs, abs_slack, rel_slack);
    s.dphi_lhs = dphi_l2 + dphi_semi;
    s.dphi_rhs = 4.0 * r.u_bar0 * r.u_bar0 * r.u_bar0 * std::sqrt(du_l2) * std::sqrt(dphi_l2);
    const bool dphi_ok = within(s.dphi_lhs, s.dphi_rhs, s.dphi_lhs + s.dphi_rhs, abs_slack, rel_slack);
    s.ok = l2_ok && dt_ok && dual_ok && dphi_ok;
    if (!s.ok) r.steps_ok = false;
    r.steps.push_back(s);
  }

  r.l2_h1_u = std::sqrt(dt * sum_h1);
  r.hminus1_dt_u = std::sqrt(dt * sum_dual);
  r.l2_phi = std::sqrt(dt * sum_phi);
  r.l2_h1_semi_phi = std::sqrt(dt * sum_semi);
  r.l2_dt_phi = std::sqrt(dt * sum_dtphi);

  r.summed_l2_lhs = u_l2[N] + dt * (sum_h1 - u_h1[0]);
  r.summed_l2_rhs = r.final_time * omega * diam * diam * ub8 + u_l2[0];
  r.summed_dt_lhs = dt * sum_dtu + u_h1[N];
  r.summed_dt_rhs = omega * r.final_time * ub8 + u_h1[0];
  r.summed_ok = within(r.summed_l2_lhs, r.summed_l2_rhs, r.summed_l2_lhs + r.summed_l2_rhs, abs_slack, rel_slack) &&
                within(r.summed_dt_lhs, r.summed_dt_rhs, r.summed_dt_lhs + r.summed_dt_rhs, abs_slack, rel_slack);

  const double terms[] = {r.l2_h1_u, r.hminus1_dt_u, r.l2_phi, r.l2_h1_semi_phi, r.l2_dt_phi};
  const bool finite = std::all_of(std::begin(terms), std::end(terms), [](double x) { return std::isfinite(x) && x >= 0.0; });
  r.passed = finite && r.steps_ok && r.phi_ok && r.summed_ok;
  return r;
}

std::string EnergyReport::summary() const {
  std::ostringstream out;
  out.precision(10);
  out << "energy.l2_h1_u: " << l2_h1_u << '\n'
      << "energy.hminus1_dt_u: " << hminus1_dt_u << '\n'
      << "energy.l2_phi: " << l2_phi << '\n'
      << "energy.l2_h1_semi_phi: " << l2_h1_semi_phi << '\n'
      << "energy.l2_dt_phi: " << l2_dt_phi << '\n'
      << "energy.inputs: |Omega|=" << domain_measure << " diam=" << domain_diameter << " T=" << final_time
      << " ubar0=" << u_bar0 << " norm_1M(u0)=" << norm_1M_u0 << " theta=" << theta << '\n'
      << "energy.per_step: " << (steps_ok ? "PASS" : "FAIL") << '\n'
      << "energy.phi_bound: " << (phi_ok ? "PASS" : "FAIL") << '\n'
      << "energy.summed: " << (summed_ok ? "PASS" : "FAIL") << '\n'
      << "energy: " << (passed ? "PASS" : "FAIL") << '\n';
  return out.str();
}

const char* to_string(NormKind kind) { return kind == NormKind::DirichletH1 ? "dirichlet_h1" : "l2"; }

double time_translate_lhs(const Discretization& disc, const SpaceTimeField& f, double tau) {
  disc.require_owns(f[0]);
  const auto& mass = disc.laplacians().mass;
  const std::size_t N = f.num_intervals();
  const double dt = f.dt();
  const double t = std::abs(tau);
  if (t == 0.0) return 0.0;

  // f-hat^m for 0 <= m < N, zero elsewhere.
  auto at = [&](long long m) -> std::span<const double> {
    if (m < 0 || m >= static_cast<long long>(N)) return {};
    return f[static_cast<std::size_t>(m)].values();
  };

  double q_real = std::floor(t / dt);
  double r = t - q_real * dt;
  if (r >= dt) {
    q_real += 1.0;
    r -= dt;
  }
  if (r < 0.0) r = 0.0;
  CompensatedSum sum;
  if (q_real >= static_cast<double>(N)) {
    // Disjoint supports.
    for (std::size_t m = 0; m < N; ++m) sum.add(2.0 * dt * diff_l2_sq(mass, f[m].values(), {}));
    return sum.value();
  }
  const auto q = static_cast<long long>(q_real);
  // On [t^n, t^n + dt - r) the translate reads index n + q, on the
  // remaining piece of length r it reads n + q + 1.
  for (long long n = -q - 1; n < static_cast<long long>(N); ++n) {
    if (dt - r > 0.0) sum.add((dt - r) * diff_l2_sq(mass, at(n + q), at(n)));
    if (r > 0.0) sum.add(r * diff_l2_sq(mass, at(n + q + 1), at(n)));
  }
  return sum.value();
}

TranslateReport time_translate_sq(const Discretization& disc, const SpaceTimeField& f, double tau, NormKind kind,
                                  const SolverConfig& cfg) {
  disc.require_owns(f[0]);
  const std::size_t N = f.num_intervals();
  const double dt = f.dt();
  TranslateReport r;
  r.tau = tau;
  r.norm_kind = kind;
  r.lhs = time_translate_lhs(disc, f, tau);
  for (std::size_t n = 0; n <= N; ++n) {
    r.sum_norm_sq += dt * (kind == NormKind::DirichletH1 ? inner_dirichlet(disc, f[n], f[n]) : l2_inner(disc, f[n], f[n]));
    if (n < N) r.max_l2_sq = std::max(r.max_l2_sq, l2_inner(disc, f[n], f[n]));
  }
  for (std::size_t n = 0; n < N; ++n) {
    const CellField d = time_difference(f, n);
    const double dual = kind == NormKind::DirichletH1 ? dual_norm_minus1(disc, d, cfg) : l2_norm(disc, d);
    r.sum_dual_dt_sq += dt * dual * dual;
  }
  r.rhs = std::abs(tau) * (2.0 * r.sum_norm_sq + 0.5 * r.sum_dual_dt_sq + 2.0 * r.max_l2_sq);
  r.passed = r.lhs >= 0.0 && r.lhs <= r.rhs * (1.0 + 1e-12);
  return r;
}

ChiIdentities chi_identities(std::size_t num_steps, double dt, double tau, std::span<const double> alphas,
                             std::size_t sweep_points, double rel_tol) {
  if (!(dt > 0.0) || !(tau > 0.0)) throw ConfigError("chi_identities: dt and tau must be positive");
  if (alphas.size() != num_steps) throw ConfigError("chi_identities: need one alpha per step");
  const std::size_t N = num_steps;

  // Breakpoints t^n (kind 0) and t^n - tau (kind 1); lengths between
  // neighbours are formed from index differences so no large times cancel.
  struct Event {
    double t;
    long long n;
    int kind;
    double delta;
  };
  std::vector<Event> events;
  events.reserve(2 * N);
  for (std::size_t i = 1; i <= N; ++i) {
    const double tn = static_cast<double>(i) * dt;
    events.push_back({tn - tau, static_cast<long long>(i), 1, alphas[i - 1]});
    events.push_back({tn, static_cast<long long>(i), 0, -alphas[i - 1]});
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  auto gap = [&](const Event& a, const Event& b) {
    const double steps = static_cast<double>(b.n - a.n) * dt;
    const double shift = (a.kind == 1 ? tau : 0.0) - (b.kind == 1 ? tau : 0.0);
    return std::max(0.0, steps + shift);
  };

  ChiIdentities out;
  CompensatedSum active;
  CompensatedSum integral;
  for (std::size_t j = 0; j + 1 < events.size(); ++j) {
    active.add(events[j].delta);
    integral.add(active.value() * gap(events[j], events[j + 1]));
  }
  CompensatedSum alpha_sum;
  double alpha_abs = 0.0;
  for (double a : alphas) {
    alpha_sum.add(a);
    alpha_abs += std::abs(a);
  }
  out.integral = integral.value();
  out.formula = tau * alpha_sum.value();
  out.integral_exact = std::abs(out.integral - out.formula) <= rel_tol * tau * alpha_abs;

  const double T = static_cast<double>(N) * dt;
  const double lo = -tau - dt;
  const double hi = T + dt;
  out.window_max = 0.0;
  for (std::size_t s = 0; s < sweep_points; ++s) {
    const double t = sweep_points == 1 ? lo : lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(sweep_points - 1);
    double w = 0.0;
    for (std::size_t i = 1; i <= N; ++i) {
      const double tn = static_cast<double>(i) * dt;
      w += std::max(0.0, std::min(t + dt, tn) - std::max(t, tn - tau));
    }
    out.window_max = std::max(out.window_max, w);
  }
  const double slack = 64.0 * std::numeric_limits<double>::epsilon() * (T + tau + dt);
  out.window_bound_ok = out.window_max <= tau + slack;
  return out;
}

double translated_overlap_integral(const Discretization& disc, const CellField& v, const CellField& w, Point2 eta) {
  disc.require_owns(v);
  disc.require_owns(w);
  const Mesh& mesh = disc.mesh();
  const CellLocator locator(mesh);
  CompensatedSum sum;
  for (CellIndex l = 0; l < mesh.num_cells(); ++l) {
    if (w[l] == 0.0) continue;
    Triangle shifted = mesh.cell_triangle(l);
    Point2 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    Point2 hi{-lo.x, -lo.y};
    for (auto& p : shifted) {
      p = p - eta;
      lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
    }
    for (CellIndex k : locator.candidates(lo, hi)) {
      if (v[k] == 0.0) continue;
      const double area = triangle_overlap_area(mesh.cell_triangle(k), shifted);
      if (area > 0.0) sum.add(v[k] * w[l] * area);
    }
  }
  return sum.value();
}

SpaceTranslateReport space_translate_sq(const Discretization& disc, const CellField& v, Point2 eta) {
  disc.require_owns(v);
  SpaceTranslateReport r;
  r.eta_norm = norm(eta);
  const auto& g = disc.geometry();
  r.h = g.h;
  r.c_used = 4.0 * g.boundary_measure / std::min(1.0, g.h);
  if (r.eta_norm == 0.0) return r;

  const double l2sq = l2_inner(disc, v, v);
  r.lhs = std::max(0.0, 2.0 * l2sq - 2.0 * translated_overlap_integral(disc, v, v, eta));
  const double h1sq = inner_dirichlet(disc, v, v);
  const double semisq = inner_neumann(disc, v, v);
  const double vinf = linf_norm(v);
  const double e = r.eta_norm;
  r.bound_dirichlet = h1sq * e * (e + r.c_used * r.h);
  r.bound_neumann = e * (semisq * (e + 2.0 * r.h) + 2.0 * g.boundary_measure * vinf * vinf);
  r.c_min = h1sq > 0.0 ? std::max(0.0, (r.lhs / (h1sq * e) - e) / r.h) : 0.0;
  const double slack = 1e-12 * (l2sq + r.lhs);
  r.dirichlet_ok = r.lhs <= r.bound_dirichlet + slack;
  r.neumann_ok = r.lhs <= r.bound_neumann + slack;
  return r;
}

}  // namespace p1fv

namespace p1fv {

OperatorIdentityReport check_operator_identities(const Discretization& disc, std::size_t num_fields,
                                                 std::uint64_t seed, double rel_tol) {
  const auto& lap = disc.laplacians();
  const std::size_t n = disc.num_cells();
  const double diam = disc.geometry().domain_diameter;
  OperatorIdentityReport r;
  r.fields = num_fields;
  for (double s : lap.neumann.row_sums()) {
    if (s != 0.0) r.neumann_rows_zero = false;
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<double> psi(n);
  for (std::size_t i = 0; i < num_fields; ++i) {
    const double shift = unit(rng) * 10.0;
    const double scale = std::pow(10.0, 3.0 * unit(rng));
    for (std::size_t k = 0; k < n; ++k) {
      switch (i % 4) {
        case 0: psi[k] = 0.5 * (unit(rng) + 1.0); break;
        case 1: psi[k] = scale * unit(rng); break;
        case 2: psi[k] = shift + unit(rng); break;
        default: psi[k] = unit(rng) > 0.6 ? scale * unit(rng) : 0.0; break;
      }
    }
    const CellField f = disc.field(psi);
    const double qd = lap.dirichlet.quadratic_form(psi);
    const double qn = lap.neumann.quadratic_form(psi);
    const double id = inner_dirichlet(disc, f, f);
    const double in = inner_neumann(disc, f, f);
    const double sd = std::max({std::abs(qd), std::abs(id), 1e-300});
    const double sn = std::max({std::abs(qn), std::abs(in), 1e-300});
    const double rel_d = std::abs(qd - id) / sd;
    const double rel_n = std::abs(qn - in) / sn;
    r.max_rel_dirichlet = std::max(r.max_rel_dirichlet, rel_d);
    r.max_rel_neumann = std::max(r.max_rel_neumann, rel_n);

    const double l2 = l2_norm(disc, f);
    const double h1 = norm_1M(disc, f);
    if (l2 > 0.0) {
      const double ratio = l2 / (diam * h1);
      r.max_poincare_ratio = std::max(r.max_poincare_ratio, ratio);
      if (!(ratio < 1.0)) r.poincare_ok = false;
    }
  }
  r.identities_ok = r.max_rel_dirichlet <= rel_tol && r.max_rel_neumann <= rel_tol && r.neumann_rows_zero;
  r.passed = r.identities_ok && r.poincare_ok;
  return r;
}

double mean_identity_defect(const Discretization& disc, const SpaceTimeField& u, const SpaceTimeField& phi) {
  if (u.num_intervals() != phi.num_intervals()) throw MeshMismatchError("u and phi have different step counts");
  disc.require_owns(u[0]);
  disc.require_owns(phi[0]);
  const auto& vol = disc.geometry().cell_volume;
  double worst = 0.0;
  for (std::size_t n = 0; n <= u.num_intervals(); ++n) {
    CompensatedSum ip, iu;
    for (std::size_t k = 0; k < vol.size(); ++k) {
      ip.add(vol[k] * phi[n][k]);
      iu.add(vol[k] * pow4(u[n][k]));
    }
    const double d = std::abs(ip.value() - iu.value());
    worst = std::max(worst, iu.value() != 0.0 ? d / std::abs(iu.value()) : d);
  }
  return worst;
}

}  // namespace p1fv
