#include "prost/forecaster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace prost {

namespace {

// 0-based inclusive window [first, last] for a forecast at 1-based episode k.
std::pair<std::size_t, std::size_t> window_range(const VisitStats& stats, std::size_t k,
                                                 std::size_t w) {
  if (w < 1) throw std::invalid_argument("window must be >= 1");
  if (k < 1 || k > stats.episodes_recorded()) {
    throw std::out_of_range("forecast episode outside recorded range");
  }
  const std::size_t first = k >= w ? k - w : 0;  // max(1, k-w+1), 0-based
  return {first, k - 1};
}

}  // namespace

MdpSnapshot ForecastedMdp::as_snapshot(std::size_t horizon, double gamma,
                                       bool renormalize_for_rollout) const {
  MdpSnapshot snap;
  snap.n_states = r_hat.rows();
  snap.n_actions = r_hat.cols();
  snap.horizon = horizon;
  snap.gamma = gamma;
  snap.transition = p_hat;
  snap.reward = r_hat;
  snap.stochasticity_class = StochasticityClass::kSubStochastic;
  if (renormalize_for_rollout) {
    const double uniform = 1.0 / static_cast<double>(snap.n_states);
    for (std::size_t s = 0; s < snap.n_states; ++s) {
      for (std::size_t a = 0; a < snap.n_actions; ++a) {
        double row_sum = 0.0;
        for (std::size_t sp = 0; sp < snap.n_states; ++sp) row_sum += snap.transition(s, a, sp);
        const double missing = std::max(0.0, 1.0 - row_sum);
        for (std::size_t sp = 0; sp < snap.n_states; ++sp) {
          snap.transition(s, a, sp) += missing * uniform;
        }
      }
    }
    snap.stochasticity_class = StochasticityClass::kExact;
  }
  return snap;
}

SwLseEstimate sw_lse_forecast(const VisitStats& stats, std::size_t k, std::size_t w,
                              double lambda) {
  if (lambda < 1.0) throw std::invalid_argument("sw_lse_forecast: lambda must be >= 1");
  const auto [first, last] = window_range(stats, k, w);
  const VisitStats::WindowSums sums = stats.window_sums(first, last);
  const std::size_t ns = stats.n_states();
  const std::size_t na = stats.n_actions();
  SwLseEstimate est;
  est.p_hat = Tensor3(ns, na, ns, 0.0);
  est.r_tilde = Matrix(ns, na, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      const double denom = lambda + sums.count(s, a);
      est.r_tilde(s, a) = sums.reward_sum(s, a) / denom;
      for (std::size_t sp = 0; sp < ns; ++sp) {
        est.p_hat(s, a, sp) = sums.trans_count(s, a, sp) / denom;
      }
    }
  }
  return est;
}

Matrix exploration_bonus(const VisitStats& stats, std::size_t k, std::size_t w, double lambda,
                         double beta) {
  if (beta <= 0.0) throw std::invalid_argument("exploration_bonus: beta must be > 0");
  if (lambda < 1.0) throw std::invalid_argument("exploration_bonus: lambda must be >= 1");
  const auto [first, last] = window_range(stats, k, w);
  const VisitStats::WindowSums sums = stats.window_sums(first, last);
  Matrix bonus(stats.n_states(), stats.n_actions(), 0.0);
  for (std::size_t s = 0; s < stats.n_states(); ++s) {
    for (std::size_t a = 0; a < stats.n_actions(); ++a) {
      bonus(s, a) = beta / std::sqrt(lambda + sums.count(s, a));
    }
  }
  return bonus;
}

ForecastedMdp forecast_sw_lse(const VisitStats& stats, std::size_t k, std::size_t w,
                              double lambda, double beta) {
  if (beta <= 0.0) throw std::invalid_argument("forecast_sw_lse: beta must be > 0");
  SwLseEstimate est = sw_lse_forecast(stats, k, w, lambda);
  const auto [first, last] = window_range(stats, k, w);
  const VisitStats::WindowSums sums = stats.window_sums(first, last);
  const std::size_t ns = stats.n_states();
  const std::size_t na = stats.n_actions();
  ForecastedMdp out;
  out.p_hat = std::move(est.p_hat);
  out.r_tilde = std::move(est.r_tilde);
  out.lambda_mat = Matrix(ns, na, 0.0);
  out.bonus = Matrix(ns, na, 0.0);
  out.r_hat = Matrix(ns, na, 0.0);
  out.window = w;
  out.lambda = lambda;
  out.beta = beta;
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      out.lambda_mat(s, a) = 1.0 / (lambda + sums.count(s, a));
      out.bonus(s, a) = beta * std::sqrt(out.lambda_mat(s, a));
      out.r_hat(s, a) = out.r_tilde(s, a) + 2.0 * out.bonus(s, a);
    }
  }
  return out;
}

double beta_floor(double lambda, double gamma, double r_max, std::size_t n_states,
                  std::size_t horizon, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("beta_floor: delta not in (0,1)");
  if (lambda < 1.0) throw std::invalid_argument("beta_floor: lambda must be >= 1");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("beta_floor: gamma not in [0,1)");
  const double h = static_cast<double>(horizon);
  const double log_term = std::max(0.0, std::log(h / (delta * lambda)));
  const double tail = gamma * static_cast<double>(n_states) * std::sqrt(h * h / 2.0 * log_term);
  return (lambda * r_max + tail) / (2.0 + 2.0 * std::sqrt(lambda) / (1.0 - gamma));
}

std::size_t select_window(double c_k, double b_est, std::size_t k) {
  if (!(c_k > 0.0)) throw std::invalid_argument("select_window: c_k must be > 0");
  if (k < 1) throw std::invalid_argument("select_window: k must be >= 1");
  if (b_est <= 0.0) return k;
  const double w_tilde = std::pow(c_k / b_est, 2.0 / 3.0);
  const auto rounded = static_cast<long long>(std::llround(w_tilde));
  return static_cast<std::size_t>(std::clamp<long long>(rounded, 1, static_cast<long long>(k)));
}

namespace {

// Episode-level squared-error coefficients for the W-LSE q-subproblem:
// sse_t = sum_{s,a} [n_t m_r^2 - 2 m_r S_t + SS_t]
//       + sum_{s,a} [n_t sum_{s'} m_p^2 - 2 sum_{s'} m_p n_t(s') + n_t].
std::vector<double> episode_sse(const VisitStats& stats, std::size_t k, const Matrix& m_r,
                                const Tensor3& m_p) {
  std::vector<double> sse(k, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    const auto& ep = stats.episode(t);
    double acc = 0.0;
    for (const auto& rec : ep.sa) {
      const double m = m_r(rec.state, rec.action);
      acc += rec.count * m * m - 2.0 * m * rec.reward_sum + rec.reward_sq_sum;
      double p_sq = 0.0;
      for (std::size_t sp = 0; sp < stats.n_states(); ++sp) {
        const double p = m_p(rec.state, rec.action, sp);
        p_sq += p * p;
      }
      acc += rec.count * (p_sq + 1.0);
    }
    for (const auto& rec : ep.trans) {
      acc -= 2.0 * m_p(rec.state, rec.action, rec.next_state) * rec.count;
    }
    sse[t] = acc;
  }
  return sse;
}

double model_sq_norm(const Matrix& m_r, const Tensor3& m_p) {
  double acc = 0.0;
  for (double v : m_r.data()) acc += v * v;
  for (double v : m_p.data()) acc += v * v;
  return acc;
}

// Euclidean projection onto the probability simplex.
std::vector<double> project_simplex(std::vector<double> v) {
  std::vector<double> sorted = v;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  std::size_t support = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    cumulative += sorted[i];
    const double candidate = (cumulative - 1.0) / static_cast<double>(i + 1);
    if (sorted[i] - candidate > 0.0) {
      support = i + 1;
      theta = candidate;
    }
  }
  (void)support;
  for (double& x : v) x = std::max(0.0, x - theta);
  return v;
}

}  // namespace

SwLseEstimate wlse_model_for_weights(const VisitStats& stats, std::size_t k,
                                     std::span<const double> q, double lambda) {
  if (q.size() != k) throw std::invalid_argument("wlse_model_for_weights: weight size mismatch");
  const std::size_t ns = stats.n_states();
  const std::size_t na = stats.n_actions();
  double q_sq = 0.0;
  for (double w : q) q_sq += w * w;
  const double ridge = lambda * q_sq;

  Matrix w_count(ns, na, 0.0);
  Matrix w_reward(ns, na, 0.0);
  Tensor3 w_trans(ns, na, ns, 0.0);
  for (std::size_t t = 0; t < k; ++t) {
    const double weight = q[t];
    if (weight == 0.0) continue;
    const auto& ep = stats.episode(t);
    for (const auto& rec : ep.sa) {
      w_count(rec.state, rec.action) += weight * rec.count;
      w_reward(rec.state, rec.action) += weight * rec.reward_sum;
    }
    for (const auto& rec : ep.trans) {
      w_trans(rec.state, rec.action, rec.next_state) += weight * rec.count;
    }
  }
  SwLseEstimate est;
  est.p_hat = Tensor3(ns, na, ns, 0.0);
  est.r_tilde = Matrix(ns, na, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      const double denom = w_count(s, a) + ridge;
      if (denom <= 0.0) continue;  // no data and zero ridge: leave at zero
      est.r_tilde(s, a) = w_reward(s, a) / denom;
      for (std::size_t sp = 0; sp < ns; ++sp) {
        est.p_hat(s, a, sp) = w_trans(s, a, sp) / denom;
      }
    }
  }
  return est;
}

WlseSolution w_lse_forecast(const VisitStats& stats, std::size_t k, double lambda,
                            const WlseConfig& cfg) {
  if (k < 1 || k > stats.episodes_recorded()) {
    throw std::out_of_range("w_lse_forecast: k outside recorded range");
  }
  if (lambda < 1.0) throw std::invalid_argument("w_lse_forecast: lambda must be >= 1");

  WlseSolution sol;
  sol.q.assign(k, 1.0 / static_cast<double>(k));

  auto disc_of = [&](const std::vector<double>& q) {
    double acc = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      acc += q[t] * static_cast<double>(k - 1 - t) / static_cast<double>(k);
    }
    return cfg.c_disc * acc;
  };
  auto objective = [&](const std::vector<double>& q, const SwLseEstimate& model) {
    const std::vector<double> sse = episode_sse(stats, k, model.r_tilde, model.p_hat);
    double q_sq = 0.0;
    double fit = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
      fit += q[t] * sse[t];
      q_sq += q[t] * q[t];
    }
    return fit + disc_of(q) + lambda * q_sq * model_sq_norm(model.r_tilde, model.p_hat);
  };

  SwLseEstimate model = wlse_model_for_weights(stats, k, sol.q, lambda);
  double obj = objective(sol.q, model);
  sol.converged = false;
  for (std::size_t iter = 0; iter < cfg.max_alternations; ++iter) {
    // q-step: minimize sum q_t c_t + alpha ||q||^2 over the simplex.
    const std::vector<double> sse = episode_sse(stats, k, model.r_tilde, model.p_hat);
    const double alpha = lambda * model_sq_norm(model.r_tilde, model.p_hat);
    std::vector<double> cost(k, 0.0);
    for (std::size_t t = 0; t < k; ++t) {
      cost[t] = sse[t] + cfg.c_disc * static_cast<double>(k - 1 - t) / static_cast<double>(k);
    }
    if (alpha > 0.0) {
      std::vector<double> target(k, 0.0);
      for (std::size_t t = 0; t < k; ++t) target[t] = -cost[t] / (2.0 * alpha);
      sol.q = project_simplex(std::move(target));
    } else {
      const double best = *std::min_element(cost.begin(), cost.end());
      std::size_t hits = 0;
      for (double c : cost) hits += c == best ? 1 : 0;
      for (std::size_t t = 0; t < k; ++t) {
        sol.q[t] = cost[t] == best ? 1.0 / static_cast<double>(hits) : 0.0;
      }
    }
    // m-step: closed-form weighted regularized mean.
    model = wlse_model_for_weights(stats, k, sol.q, lambda);
    const double next_obj = objective(sol.q, model);
    sol.alternations = iter + 1;
    const bool done = std::abs(obj - next_obj) < cfg.tol;
    obj = next_obj;
    if (done) {
      sol.converged = true;
      break;
    }
  }
  sol.p_hat = std::move(model.p_hat);
  sol.r_tilde = std::move(model.r_tilde);
  sol.disc_value = disc_of(sol.q);
  sol.objective_value = obj;
  return sol;
}

ScalarForecastResult scalar_forecast(const ScalarForecaster& f,
                                     std::span<const double> window_values) {
  if (window_values.size() < 1) throw std::invalid_argument("scalar_forecast: empty window");
  auto simple_average = [&]() {
    const double sum = std::accumulate(window_values.begin(), window_values.end(), 0.0);
    return sum / static_cast<double>(window_values.size());
  };
  if (f.kind == ScalarForecaster::Kind::kSimpleAverage) {
    return {simple_average(), false};
  }

  if (f.ar_order >= window_values.size()) {
    throw std::invalid_argument("scalar_forecast: ar order must be < window");
  }
  if (f.ar_diff != 0 && f.ar_diff != 1) {
    throw std::invalid_argument("scalar_forecast: ar differencing must be 0 or 1");
  }

  std::vector<double> series(window_values.begin(), window_values.end());
  if (f.ar_diff == 1) {
    std::vector<double> diffs;
    for (std::size_t i = 1; i < series.size(); ++i) diffs.push_back(series[i] - series[i - 1]);
    series = std::move(diffs);
  }
  const std::size_t p = f.ar_order;
  if (series.size() < p + 1) return {simple_average(), true};

  // Ordinary least squares on x_i = sum_j a_j x_{i-j}, no intercept.
  Matrix normal(p, p, 0.0);
  std::vector<double> rhs(p, 0.0);
  for (std::size_t i = p; i < series.size(); ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      rhs[j] += series[i] * series[i - 1 - j];
      for (std::size_t l = 0; l < p; ++l) {
        normal(j, l) += series[i - 1 - j] * series[i - 1 - l];
      }
    }
  }
  std::vector<double> coeffs;
  try {
    coeffs = solve_dense(normal, rhs);
  } catch (const std::runtime_error&) {
    return {simple_average(), true};
  }
  double next = 0.0;
  for (std::size_t j = 0; j < p; ++j) next += coeffs[j] * series[series.size() - 1 - j];
  if (f.ar_diff == 1) next += window_values.back();
  if (!std::isfinite(next)) return {simple_average(), true};
  return {next, false};
}

MdpSnapshot structural_g(const EnvDefinition& env, double o_hat) {
  if (!std::isfinite(o_hat)) throw std::invalid_argument("structural_g: non-finite parameter");
  return apply_modulation(env, o_hat);
}

}  // namespace prost
