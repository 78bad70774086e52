#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "prost/env.hpp"
#include "prost/forecaster.hpp"
#include "prost/planner.hpp"
#include "prost/tempo.hpp"
#include "prost/visit_stats.hpp"

namespace prost {

// Per-episode dynamic-regret ledger: gap between the episode's own optimal
// H-step value and the executed policy's value, both at the initial
// distribution rho, with the cumulative prefix sum.
struct RegretLedgerRow {
  std::size_t k = 0;
  double t = 0.0;
  double v_star = 0.0;
  double v_pi = 0.0;
  double gap = 0.0;
  double cum_regret = 0.0;
};

struct RegretLedger {
  std::vector<RegretLedgerRow> rows;
  double total() const { return rows.empty() ? 0.0 : rows.back().cum_regret; }
};

RegretLedger dynamic_regret(const EnvDefinition& env, const std::vector<SoftmaxPolicy>& policies,
                            const std::vector<double>& times, const std::vector<double>& rho);

// Model prediction errors of one forecast against the realized next episode.
//   iota_h = (R_{k+1} + gamma P_{k+1} Vhat_{h+1} - Qhat_h)(s_h, a_h)
// on the realized trajectory, with Vhat/Qhat the finite-horizon tables of the
// executed policy in the forecasted model, and
//   iota_bar_inf = sup_{s,a} |R_{k+1} + gamma P_{k+1} Vhat*_inf - Qhat*_inf|
// with the infinite-horizon optimal values of the forecasted model.
struct PredictionErrorRecord {
  std::vector<double> iota_steps;
  double iota_kh_sum = 0.0;   // sum_h iota_h
  double iota_bar_inf = 0.0;  // sup-norm over (s,a)
};

PredictionErrorRecord model_prediction_error(const MdpSnapshot& true_next,
                                             const MdpSnapshot& forecast,
                                             const SoftmaxPolicy& executed,
                                             const Trajectory& realized, double tol = 1e-10);

// The full stack of regret-bound constants and the two bound curves.
struct BoundReport {
  double c_p = 0.0;
  double c1 = 0.0;
  double c2 = 0.0;
  double c_alg = 0.0;
  double c_alg_tau = 0.0;
  double c_i_of_b = 0.0;
  double c_k = 0.0;
  double r_i_max = 0.0;
  double r_ii_max = 0.0;
  double total_bound = 0.0;
  double confidence = 0.0;
  bool entropy_mode = true;
  std::size_t delta_pi = 1;
  std::size_t window = 1;
  std::size_t episodes = 0;
  double b_r = 0.0;
  double b_p = 0.0;
  // Curves over delta_pi = 1..K-1 with the proof's adaptive window
  // w~(delta_pi) = (c_k / C_I[B(delta_pi)])^(2/3) and budget extrapolation
  // B(delta_pi) = delta_pi^alpha B(1).
  std::vector<double> r_i_curve;
  std::vector<double> r_ii_curve;
};

// Evaluates the regret upper bounds at the given tempo and window. Budgets
// default to the profile extrapolation; measured values override the
// headline numbers when supplied (post-hoc reporting). c1_exact, when known
// from a run, replaces the worst-case planning bound.
BoundReport regret_bound(const HyperParams& hp, const BudgetProfile& budget, std::size_t episodes,
                         std::size_t delta_pi, std::size_t window,
                         std::optional<double> c1_exact = std::nullopt, bool entropy_mode = true,
                         std::optional<double> measured_b_r = std::nullopt,
                         std::optional<double> measured_b_p = std::nullopt);

// C_I[B] = (1/(1-gamma) + H) B_r + (1 + H r_hat_max) gamma/(1-gamma) B_p.
double c_i_of_budget(const HyperParams& hp, double b_r, double b_p);

// C_k = (K-1) sqrt(H) (lambda r_max + 2 beta
//        + gamma r_hat/(1-gamma) (|S| sqrt(H^2/2 log(H/(p lambda))) + lambda)).
// The overloaded confidence parameter of the analysis is taken from
// hp.confidence.
double c_k_constant(const HyperParams& hp, std::size_t episodes);

// Pass/fail report of the hyperparameter inequalities needed for the epsilon
// threshold, plus the sample-count recommendation for monte_carlo evaluation
// and the sublinearity precondition ratio.
struct ConditionReport {
  TempoFeasibility feas;
  double sample_recommendation = 0.0;  // order 1/((1-gamma)^3 delta_max^2)
  double prop2_ratio = 0.0;            // (B_r(1) + r_hat/(1-gamma) B_p(1)) / K
  bool all_ok() const { return feas.delta_ok && feas.h_ok && feas.tau_ok; }
};

ConditionReport check_conditions(const HyperParams& hp, double epsilon, std::size_t episodes,
                                 double c1, double b_r_unit = 0.0, double b_p_unit = 0.0);

}  // namespace prost
