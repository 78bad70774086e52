#pragma once

#include <cstddef>
#include <vector>

#include "prost/matrix.hpp"
#include "prost/mdp.hpp"
#include "prost/rng.hpp"

namespace prost {

// Tabular softmax policy pi(a|s) = exp(theta(s,a)) / sum_a' exp(theta(s,a')).
struct SoftmaxPolicy {
  Matrix logits;

  static SoftmaxPolicy uniform(std::size_t n_states, std::size_t n_actions);
  static SoftmaxPolicy greedy_from(const Matrix& q, double sharpness = 1e6);

  Matrix probs() const;
  Matrix log_probs() const;
};

// Infinite-horizon discounted value pair. For tau > 0 these are the soft
// (entropy-regularized) values: v(s) = sum_a pi(a|s) (q(s,a) - tau log pi).
struct ValueTable {
  Matrix q;
  std::vector<double> v;
  double tau = 0.0;
};

// Per-step finite-horizon tables with terminal condition v[H] = 0 and
// q[h] = R + gamma * P * v[h+1].
struct HorizonValues {
  std::vector<Matrix> q;               // index h = 0..H-1
  std::vector<std::vector<double>> v;  // index h = 0..H, v[H] all zero
  double tau = 0.0;

  double value_at(const std::vector<double>& rho) const;  // <rho, v[0]>
};

// Fixed point of the soft Bellman operator for pi, solved exactly (dense
// linear system) and verified to sup-norm residual <= tol. tau = 0 reduces to
// plain policy evaluation. Sub-stochastic transition rows are handled as-is:
// missing mass contributes zero continuation value.
ValueTable soft_policy_eval(const MdpSnapshot& mdp, const SoftmaxPolicy& pi, double tau,
                            double tol = 1e-10);

// Exact backward induction for pi (soft when tau > 0).
HorizonValues finite_horizon_eval(const MdpSnapshot& mdp, const SoftmaxPolicy& pi,
                                  double tau = 0.0);

// Optimal infinite-horizon values by value iteration. tau = 0: hard max with
// greedy tie-break to the lowest action index; tau > 0: soft value iteration
// v(s) = tau log sum_a exp(q(s,a)/tau) with the Boltzmann optimal policy.
struct OptimalValues {
  ValueTable values;
  SoftmaxPolicy policy;              // Boltzmann for tau > 0, sharp for tau = 0
  std::vector<std::size_t> greedy;   // argmax actions (tau = 0 semantics)
  std::size_t iterations = 0;
};

OptimalValues optimal_values(const MdpSnapshot& mdp, double tau, double tol = 1e-10);

// Optimal finite-horizon tables by backward induction (hard max, lowest-index
// tie-break). Per-step greedy actions returned alongside.
struct OptimalHorizonValues {
  HorizonValues values;
  std::vector<std::vector<std::size_t>> greedy;  // [h][s]
};

OptimalHorizonValues optimal_finite_horizon(const MdpSnapshot& mdp);

// Controlled inexactness of the policy evaluation step.
struct EvalNoise {
  enum class Mode { kNone, kBoundedUniform, kMonteCarlo };
  Mode mode = Mode::kNone;
  double delta = 0.0;        // bound for kBoundedUniform
  std::size_t samples = 0;   // rollouts per (s,a) for kMonteCarlo
  std::size_t rollout_len = 0;  // 0: derived from gamma and a 1e-6 tail
};

struct PerturbedQ {
  Matrix q;
  double realized_deviation = 0.0;  // ||q - exact||_inf
};

// kBoundedUniform adds i.i.d. Unif([-delta, delta]) per entry; kMonteCarlo
// re-estimates the soft Q by truncated rollouts (sub-stochastic rows
// terminate with the missing mass). kNone is the identity.
PerturbedQ perturb_q(const Matrix& exact_q, const EvalNoise& noise, Rng& rng,
                     const MdpSnapshot& mdp, const SoftmaxPolicy& pi, double tau);

// One step of NPG with entropy regularization under softmax parameterization:
//   pi'(.|s) proportional to pi(.|s)^(1 - eta*tau/(1-gamma)) * exp(eta*q/(1-gamma))
// computed in log space. Requires 0 < eta <= (1-gamma)/tau when tau > 0.
SoftmaxPolicy npg_step(const SoftmaxPolicy& pi, const Matrix& q_tau, double eta, double tau,
                       double gamma);

// Runs delta_pi alternations of exact soft evaluation, noise injection, and
// npg_step in the forecasted model. When with_trace is set, also returns the
// per-iteration distance ||Q*_tau - Q^{(g)}_tau||_inf for g = 0..delta_pi and
// the mean-KL of each iterate to the final policy.
struct OptimizeResult {
  SoftmaxPolicy policy;
  std::vector<double> q_gap_trace;
  std::vector<double> kl_to_final;
  double max_noise_deviation = 0.0;
};

OptimizeResult optimize_future_policy(const MdpSnapshot& fmdp, const SoftmaxPolicy& pi0,
                                      std::size_t delta_pi, double eta, double tau,
                                      const EvalNoise& noise, Rng& rng, bool with_trace,
                                      double tol = 1e-10);

}  // namespace prost
