#pragma once

#include <span>
#include <vector>

#include "prost/env.hpp"
#include "prost/mdp.hpp"
#include "prost/visit_stats.hpp"

namespace prost {

// Sliding-window regularized least-squares estimate of the next-episode MDP
// with count-based exploration bonus:
//   P_hat(s'|s,a)  = sum_w n_t(s',s,a) / (lambda + sum_w n_t(s,a))
//   R_tilde(s,a)   = sum_w reward / (lambda + sum_w n_t(s,a))
//   Lambda(s,a)    = 1 / (lambda + sum_w n_t(s,a))
//   Gamma(s,a)     = beta * sqrt(Lambda(s,a))
//   R_hat          = R_tilde + 2 * Gamma
// The window covers episodes max(1, k-w+1)..k.
struct ForecastedMdp {
  Tensor3 p_hat;
  Matrix r_tilde;
  Matrix bonus;
  Matrix r_hat;
  Matrix lambda_mat;
  std::size_t window = 0;
  double lambda = 1.0;
  double beta = 0.0;

  // Packages the forecast as a sub-stochastic snapshot for planning. When
  // renormalize_for_rollout is set, the missing row mass lambda/(lambda+n) is
  // spread uniformly over states so sampled rollouts see a proper
  // distribution; planning backups use the raw estimator.
  MdpSnapshot as_snapshot(std::size_t horizon, double gamma,
                          bool renormalize_for_rollout = false) const;
};

struct SwLseEstimate {
  Tensor3 p_hat;
  Matrix r_tilde;
};

// Closed-form SW-LSE solution at episode k (1-based) with window w and ridge
// lambda >= 1. Unvisited pairs get a zero transition row and zero reward.
SwLseEstimate sw_lse_forecast(const VisitStats& stats, std::size_t k, std::size_t w,
                              double lambda);

// Gamma_w^(k)(s,a) = beta * (lambda + windowed count)^(-1/2), beta > 0.
Matrix exploration_bonus(const VisitStats& stats, std::size_t k, std::size_t w, double lambda,
                         double beta);

// Full fused forecast (estimate + bonus + bonus-augmented reward).
ForecastedMdp forecast_sw_lse(const VisitStats& stats, std::size_t k, std::size_t w,
                              double lambda, double beta);

// Lower bound on the exploration-bonus scale required by the regret analysis:
//   (2 + 2 sqrt(lambda)/(1-gamma))^-1 *
//       (lambda r_max + gamma |S| sqrt((H^2/2) log(H/(delta lambda)))).
// delta is the confidence parameter in (0,1). The log is clamped at zero for
// parameter ranges where the probabilistic term is vacuous.
double beta_floor(double lambda, double gamma, double r_max, std::size_t n_states,
                  std::size_t horizon, double delta);

// Adaptive window w~ = (c_k / b_est)^(2/3), rounded and clamped to [1, k].
// A zero budget estimate returns k (full history).
std::size_t select_window(double c_k, double b_est, std::size_t k);

// Joint weight/model estimate. One weight per past episode, on the simplex.
//
// Objective, minimized by exact alternating steps (both are global minimizers
// of the same function, so the value never increases):
//   sum_t q_t * sse_t(model) + c_disc * sum_t q_t (k - t)/k
//     + lambda * ||q||^2 * (||R_tilde||^2 + ||P_hat||^2)
// where sse_t is episode t's squared prediction error under the model. The
// ||q||^2 ridge scaling makes uniform weights over the last w episodes
// reproduce the SW-LSE closed form exactly. disc(q) penalizes weight on stale
// observations.
struct WlseConfig {
  double c_disc = 1.0;
  std::size_t max_alternations = 200;
  double tol = 1e-9;
};

struct WlseSolution {
  std::vector<double> q;
  Tensor3 p_hat;
  Matrix r_tilde;
  double disc_value = 0.0;
  double objective_value = 0.0;
  bool converged = false;
  std::size_t alternations = 0;
};

WlseSolution w_lse_forecast(const VisitStats& stats, std::size_t k, double lambda,
                            const WlseConfig& cfg = {});

// Model minimizing the W-LSE objective for fixed weights q (the m-step).
SwLseEstimate wlse_model_for_weights(const VisitStats& stats, std::size_t k,
                                     std::span<const double> q, double lambda);

// Scalar one-step-ahead forecaster f: O^w -> O.
struct ScalarForecaster {
  enum class Kind { kArLs, kSimpleAverage };
  Kind kind = Kind::kSimpleAverage;
  std::size_t window = 3;
  std::size_t ar_order = 1;
  int ar_diff = 0;  // 0 or 1
};

struct ScalarForecastResult {
  double value = 0.0;
  bool ar_fallback = false;  // singular normal equations, simple average used
};

ScalarForecastResult scalar_forecast(const ScalarForecaster& f,
                                     std::span<const double> window_values);

// Structural half g of the MDP forecaster: renders the environment's
// modulation rule at the predicted parameter.
MdpSnapshot structural_g(const EnvDefinition& env, double o_hat);

}  // namespace prost
