#pragma once

// Runtime checks of the a priori bounds satisfied by scheme trajectories:
// maximum principle, energy estimates, time and space translates.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "p1fv/discrete_space.hpp"
#include "p1fv/scheme.hpp"

namespace p1fv {

struct MaxPrincipleStep {
  std::size_t n = 0;
  double u_min = 0.0;
  double u_max = 0.0;
  double u_bound = 0.0;  ///< max u^{n-1}; for n = 0 the step's own maximum
  double phi_min = 0.0;
  double phi_max = 0.0;
  double phi_bound = 0.0;  ///< (max u^n)^4
  bool u_ok = true;
  bool phi_ok = true;
};

struct MaxPrincipleReport {
  std::vector<MaxPrincipleStep> steps;
  bool passed = true;
  /// First violation, if any.
  std::size_t fail_step = 0;
  std::size_t fail_cell = 0;
  std::string fail_what;

  std::string summary() const;
};

/// 0 <= u^n <= max u^{n-1} and 0 <= phi^n <= (max u^n)^4 with tolerance
/// rel_tol times the bound.
MaxPrincipleReport check_max_principle(const SpaceTimeField& u, const SpaceTimeField& phi, double rel_tol = 1e-10);
inline MaxPrincipleReport check_max_principle(const Trajectory& traj, double rel_tol = 1e-10) {
  return check_max_principle(traj.u, traj.phi, rel_tol);
}

/// Per-step inequalities from the energy estimates, as lhs/rhs pairs.
struct EnergyStep {
  std::size_t n = 0;
  /// ||u^{n+1}||^2 - ||u^n||^2 + dt ||u^{n+1}||_{1,M}^2  <=  dt |Omega| diam^2 ubar^8
  double l2_lhs = 0.0, l2_rhs = 0.0;
  /// ||d_t u^n||^2 + (||u^{n+1}||_{1,M}^2 - ||u^n||_{1,M}^2) / dt  <=  |Omega| ubar^8
  double dt_lhs = 0.0, dt_rhs = 0.0;
  /// ||d_t u^n||_{-1,M}  <=  ||u^{n+1}||_{1,M} + ubar^4 |Omega|^{1/2} diam
  double dual_lhs = 0.0, dual_rhs = 0.0;
  /// ||d_t phi^n||^2 + |d_t phi^n|_{1,M}^2  <=  4 ubar^3 ||d_t u^n|| ||d_t phi^n||
  double dphi_lhs = 0.0, dphi_rhs = 0.0;
  bool ok = true;
};

struct EnergyReport {
  double l2_h1_u = 0.0;          ///< (dt sum_{0..N} ||u^n||_{1,M}^2)^{1/2}
  double hminus1_dt_u = 0.0;     ///< (dt sum_{0..N-1} ||d_t u^n||_{-1,M}^2)^{1/2}
  double l2_phi = 0.0;           ///< (dt sum_{0..N} ||phi^n||^2)^{1/2}
  double l2_h1_semi_phi = 0.0;   ///< (dt sum_{0..N} |phi^n|_{1,M}^2)^{1/2}
  double l2_dt_phi = 0.0;        ///< (dt sum_{0..N-1} ||d_t phi^n||^2)^{1/2}

  // Inputs of the bound constant.
  double domain_measure = 0.0;
  double domain_diameter = 0.0;
  double final_time = 0.0;
  double u_bar0 = 0.0;
  double norm_1M_u0 = 0.0;
  double theta = 0.0;

  std::vector<EnergyStep> steps;
  /// 1/2 ||phi^n||^2 + |phi^n|_{1,M}^2 <= 1/2 |Omega| ubar^8, n = 0..N.
  std::vector<double> phi_lhs;
  double phi_rhs = 0.0;
  bool phi_ok = true;

  /// Summed forms: ||u^N||^2 + dt sum_{1..N} ||u^n||_{1,M}^2 <= T |Omega| diam^2 ubar^8 + ||u^0||^2
  /// and ||d_t u||_{L2(Q)}^2 + ||u^N||_{1,M}^2 <= |Omega| T ubar^8 + ||u^0||_{1,M}^2.
  double summed_l2_lhs = 0.0, summed_l2_rhs = 0.0;
  double summed_dt_lhs = 0.0, summed_dt_rhs = 0.0;
  bool summed_ok = true;

  bool steps_ok = true;
  bool passed = true;

  std::string summary() const;
};

/// Each inequality is accepted when lhs <= rhs + abs_slack + rel_slack *
/// (sum of the magnitudes of the terms involved).
EnergyReport energy_budget(const Discretization& disc, const SpaceTimeField& u, const SpaceTimeField& phi,
                           const SolverConfig& cfg = {}, double abs_slack = 1e-8, double rel_slack = 1e-9);
inline EnergyReport energy_budget(const Discretization& disc, const Trajectory& traj, const SolverConfig& cfg = {}) {
  return energy_budget(disc, traj.u, traj.phi, cfg);
}

enum class NormKind { DirichletH1, L2 };
const char* to_string(NormKind kind);

struct TranslateReport {
  double tau = 0.0;
  double lhs = 0.0;  ///< ||f(.+tau) - f||^2 over space-time, zero extension outside [0, T)
  double rhs = 0.0;
  NormKind norm_kind = NormKind::L2;
  double sum_norm_sq = 0.0;       ///< dt sum_{0..N} ||f^n||_s^2
  double sum_dual_dt_sq = 0.0;    ///< dt sum_{0..N-1} (||d_t f^n||^s)^2
  double max_l2_sq = 0.0;         ///< max_{0..N-1} ||f^n||^2
  bool passed = true;
};

/// Exact squared L2 norm of the time translate of the piecewise-constant
/// extension t -> f^n on [t^n, t^{n+1}), n < N, zero elsewhere, plus the
/// bound |tau| [2 sum_norm_sq + 1/2 sum_dual_dt_sq + 2 max_l2_sq]. The dual
/// norm of DirichletH1 is dual_norm_minus1; L2 is self-dual.
TranslateReport time_translate_sq(const Discretization& disc, const SpaceTimeField& f, double tau,
                                  NormKind kind, const SolverConfig& cfg = {});

/// Only the translate integral (no bound): used by tests and the oracle.
double time_translate_lhs(const Discretization& disc, const SpaceTimeField& f, double tau);

struct ChiIdentities {
  double integral = 0.0;   ///< int_R sum_n alpha_n chi^n_tau, by breakpoint sweep
  double formula = 0.0;    ///< tau sum_n alpha_n
  bool integral_exact = false;
  double window_max = 0.0;  ///< max over the sweep of int_t^{t+dt} sum_n chi^n_tau
  bool window_bound_ok = false;
};

/// chi^n_tau is the indicator of [t^n - tau, t^n), t^n = n dt, n = 1..N;
/// alphas holds alpha_1..alpha_N. The window integral is evaluated on
/// `sweep_points` uniformly spaced t in [-tau - dt, N dt + dt].
ChiIdentities chi_identities(std::size_t num_steps, double dt, double tau, std::span<const double> alphas,
                             std::size_t sweep_points = 1000, double rel_tol = 1e-14);

struct SpaceTranslateReport {
  double lhs = 0.0;  ///< ||v(.+eta) - v||^2 over R^2, zero extension
  double eta_norm = 0.0;
  double h = 0.0;
  double c_used = 0.0;  ///< 4 perimeter / min(1, h)
  double c_min = 0.0;   ///< smallest c for which the Dirichlet bound holds
  double bound_dirichlet = 0.0;
  double bound_neumann = 0.0;
  bool dirichlet_ok = true;
  bool neumann_ok = true;
};

/// Exact overlay integration; |eta| = 0 returns zeros.
SpaceTranslateReport space_translate_sq(const Discretization& disc, const CellField& v, Point2 eta);

/// sum_{K,L} v_K w_L |K cap (L - eta)| = int v(x) w(x + eta) dx.
double translated_overlap_integral(const Discretization& disc, const CellField& v, const CellField& w, Point2 eta);

struct OperatorIdentityReport {
  std::size_t fields = 0;
  double max_rel_dirichlet = 0.0;  ///< |psi^T A_D psi - inner_dirichlet(psi, psi)| / scale
  double max_rel_neumann = 0.0;
  bool neumann_rows_zero = true;   ///< every row sum of A_N is exactly 0
  double max_poincare_ratio = 0.0; ///< max ||psi|| / (diam ||psi||_{1,M}), must stay < 1
  bool identities_ok = true;
  bool poincare_ok = true;
  bool passed = true;
};

/// Random fields drawn from a mix of uniform, signed, constant-plus-noise
/// and sparse profiles with the given seed.
OperatorIdentityReport check_operator_identities(const Discretization& disc, std::size_t num_fields,
                                                 std::uint64_t seed, double rel_tol = 1e-12);

/// max_n |int phi^n - int (u^n)^4| / |int (u^n)^4|; steps with a zero
/// emission term contribute |int phi^n| instead.
double mean_identity_defect(const Discretization& disc, const SpaceTimeField& u, const SpaceTimeField& phi);

}  // namespace p1fv
