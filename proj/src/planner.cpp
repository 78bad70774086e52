#include "prost/planner.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace prost {

namespace {

void check_policy_shape(const MdpSnapshot& mdp, const SoftmaxPolicy& pi) {
  if (pi.logits.rows() != mdp.n_states || pi.logits.cols() != mdp.n_actions) {
    throw std::invalid_argument("policy shape does not match MDP");
  }
}

// Row-wise log-sum-exp, numerically stable.
double log_sum_exp_row(const Matrix& m, std::size_t row) {
  double mx = m(row, 0);
  for (std::size_t c = 1; c < m.cols(); ++c) mx = std::max(mx, m(row, c));
  double acc = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) acc += std::exp(m(row, c) - mx);
  return mx + std::log(acc);
}

Matrix q_from_v(const MdpSnapshot& mdp, const std::vector<double>& v) {
  Matrix q(mdp.n_states, mdp.n_actions, 0.0);
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      double exp_v = 0.0;
      for (std::size_t sp = 0; sp < mdp.n_states; ++sp) {
        exp_v += mdp.transition(s, a, sp) * v[sp];
      }
      q(s, a) = mdp.reward(s, a) + mdp.gamma * exp_v;
    }
  }
  return q;
}

std::size_t value_iteration_cap(const MdpSnapshot& mdp, double tol) {
  const double span = std::max(1.0, 2.0 * mdp.max_abs_reward() / (1.0 - mdp.gamma));
  const double steps = (std::log(span) + std::log(1.0 / tol)) / -std::log(mdp.gamma);
  return static_cast<std::size_t>(steps) + 64;
}

}  // namespace

SoftmaxPolicy SoftmaxPolicy::uniform(std::size_t n_states, std::size_t n_actions) {
  return SoftmaxPolicy{Matrix(n_states, n_actions, 0.0)};
}

SoftmaxPolicy SoftmaxPolicy::greedy_from(const Matrix& q, double sharpness) {
  Matrix logits(q.rows(), q.cols(), 0.0);
  for (std::size_t s = 0; s < q.rows(); ++s) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < q.cols(); ++a) {
      if (q(s, a) > q(s, best)) best = a;
    }
    for (std::size_t a = 0; a < q.cols(); ++a) logits(s, a) = a == best ? sharpness : 0.0;
  }
  return SoftmaxPolicy{std::move(logits)};
}

Matrix SoftmaxPolicy::probs() const {
  Matrix out(logits.rows(), logits.cols(), 0.0);
  for (std::size_t s = 0; s < logits.rows(); ++s) {
    const double lse = log_sum_exp_row(logits, s);
    for (std::size_t a = 0; a < logits.cols(); ++a) out(s, a) = std::exp(logits(s, a) - lse);
  }
  return out;
}

Matrix SoftmaxPolicy::log_probs() const {
  Matrix out(logits.rows(), logits.cols(), 0.0);
  for (std::size_t s = 0; s < logits.rows(); ++s) {
    const double lse = log_sum_exp_row(logits, s);
    for (std::size_t a = 0; a < logits.cols(); ++a) out(s, a) = logits(s, a) - lse;
  }
  return out;
}

double HorizonValues::value_at(const std::vector<double>& rho) const {
  if (v.empty() || rho.size() != v[0].size()) {
    throw std::invalid_argument("value_at: distribution size mismatch");
  }
  double acc = 0.0;
  for (std::size_t s = 0; s < rho.size(); ++s) acc += rho[s] * v[0][s];
  return acc;
}

ValueTable soft_policy_eval(const MdpSnapshot& mdp, const SoftmaxPolicy& pi, double tau,
                            double tol) {
  check_policy_shape(mdp, pi);
  if (tau < 0.0) throw std::invalid_argument("soft_policy_eval: tau must be >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("soft_policy_eval: tol must be > 0");
  const std::size_t ns = mdp.n_states;
  const Matrix probs = pi.probs();
  const Matrix logp = pi.log_probs();

  // V = r_pi + gamma * P_pi V with r_pi(s) = sum_a pi (r - tau log pi).
  Matrix system(ns, ns, 0.0);
  std::vector<double> rhs(ns, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    system(s, s) = 1.0;
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      const double w = probs(s, a);
      rhs[s] += w * (mdp.reward(s, a) - tau * logp(s, a));
      for (std::size_t sp = 0; sp < ns; ++sp) {
        system(s, sp) -= mdp.gamma * w * mdp.transition(s, a, sp);
      }
    }
  }
  ValueTable table;
  table.tau = tau;
  table.v = solve_dense(std::move(system), std::move(rhs));
  table.q = q_from_v(mdp, table.v);

  double residual = 0.0;
  for (std::size_t s = 0; s < ns; ++s) {
    double backed_up = 0.0;
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      backed_up += probs(s, a) * (table.q(s, a) - tau * logp(s, a));
    }
    residual = std::max(residual, std::abs(backed_up - table.v[s]));
  }
  if (residual > tol) {
    throw std::runtime_error("soft_policy_eval: residual " + std::to_string(residual) +
                             " above tolerance");
  }
  return table;
}

HorizonValues finite_horizon_eval(const MdpSnapshot& mdp, const SoftmaxPolicy& pi, double tau) {
  check_policy_shape(mdp, pi);
  const std::size_t ns = mdp.n_states;
  const std::size_t h_total = mdp.horizon;
  const Matrix probs = pi.probs();
  const Matrix logp = pi.log_probs();

  HorizonValues out;
  out.tau = tau;
  out.v.assign(h_total + 1, std::vector<double>(ns, 0.0));
  out.q.assign(h_total, Matrix(ns, mdp.n_actions, 0.0));
  for (std::size_t h = h_total; h-- > 0;) {
    out.q[h] = q_from_v(mdp, out.v[h + 1]);
    for (std::size_t s = 0; s < ns; ++s) {
      double val = 0.0;
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        val += probs(s, a) * (out.q[h](s, a) - tau * logp(s, a));
      }
      out.v[h][s] = val;
    }
  }
  return out;
}

OptimalValues optimal_values(const MdpSnapshot& mdp, double tau, double tol) {
  if (tau < 0.0) throw std::invalid_argument("optimal_values: tau must be >= 0");
  const std::size_t ns = mdp.n_states;
  const std::size_t cap = value_iteration_cap(mdp, tol);

  OptimalValues out;
  std::vector<double> v(ns, 0.0);
  Matrix q(ns, mdp.n_actions, 0.0);
  double residual = 0.0;
  std::size_t iter = 0;
  for (; iter < cap; ++iter) {
    q = q_from_v(mdp, v);
    std::vector<double> next(ns, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
      if (tau > 0.0) {
        double mx = q(s, 0);
        for (std::size_t a = 1; a < mdp.n_actions; ++a) mx = std::max(mx, q(s, a));
        double acc = 0.0;
        for (std::size_t a = 0; a < mdp.n_actions; ++a) acc += std::exp((q(s, a) - mx) / tau);
        next[s] = mx + tau * std::log(acc);
      } else {
        double mx = q(s, 0);
        for (std::size_t a = 1; a < mdp.n_actions; ++a) mx = std::max(mx, q(s, a));
        next[s] = mx;
      }
    }
    residual = 0.0;
    for (std::size_t s = 0; s < ns; ++s) residual = std::max(residual, std::abs(next[s] - v[s]));
    v = std::move(next);
    if (residual <= tol) break;
  }
  if (residual > tol) {
    throw std::runtime_error("optimal_values: no convergence within iteration cap");
  }
  out.iterations = iter + 1;
  out.values.tau = tau;
  out.values.q = q_from_v(mdp, v);
  out.values.v = std::move(v);
  out.greedy.assign(ns, 0);
  for (std::size_t s = 0; s < ns; ++s) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < mdp.n_actions; ++a) {
      if (out.values.q(s, a) > out.values.q(s, best)) best = a;  // ties keep lowest index
    }
    out.greedy[s] = best;
  }
  if (tau > 0.0) {
    Matrix logits(ns, mdp.n_actions, 0.0);
    for (std::size_t s = 0; s < ns; ++s) {
      for (std::size_t a = 0; a < mdp.n_actions; ++a) logits(s, a) = out.values.q(s, a) / tau;
    }
    out.policy = SoftmaxPolicy{std::move(logits)};
  } else {
    out.policy = SoftmaxPolicy::greedy_from(out.values.q);
  }
  return out;
}

OptimalHorizonValues optimal_finite_horizon(const MdpSnapshot& mdp) {
  const std::size_t ns = mdp.n_states;
  const std::size_t h_total = mdp.horizon;
  OptimalHorizonValues out;
  out.values.tau = 0.0;
  out.values.v.assign(h_total + 1, std::vector<double>(ns, 0.0));
  out.values.q.assign(h_total, Matrix(ns, mdp.n_actions, 0.0));
  out.greedy.assign(h_total, std::vector<std::size_t>(ns, 0));
  for (std::size_t h = h_total; h-- > 0;) {
    out.values.q[h] = q_from_v(mdp, out.values.v[h + 1]);
    for (std::size_t s = 0; s < ns; ++s) {
      std::size_t best = 0;
      for (std::size_t a = 1; a < mdp.n_actions; ++a) {
        if (out.values.q[h](s, a) > out.values.q[h](s, best)) best = a;
      }
      out.greedy[h][s] = best;
      out.values.v[h][s] = out.values.q[h](s, best);
    }
  }
  return out;
}

PerturbedQ perturb_q(const Matrix& exact_q, const EvalNoise& noise, Rng& rng,
                     const MdpSnapshot& mdp, const SoftmaxPolicy& pi, double tau) {
  if (noise.delta < 0.0) throw std::invalid_argument("perturb_q: delta must be >= 0");
  PerturbedQ out;
  out.q = exact_q;
  switch (noise.mode) {
    case EvalNoise::Mode::kNone:
      return out;
    case EvalNoise::Mode::kBoundedUniform: {
      if (noise.delta == 0.0) return out;
      for (double& v : out.q.data()) {
        const double eps = rng.uniform(-noise.delta, noise.delta);
        v += eps;
        out.realized_deviation = std::max(out.realized_deviation, std::abs(eps));
      }
      return out;
    }
    case EvalNoise::Mode::kMonteCarlo:
      break;
  }
  if (noise.samples == 0) throw std::invalid_argument("perturb_q: monte_carlo needs samples > 0");

  std::size_t rollout_len = noise.rollout_len;
  if (rollout_len == 0) {
    rollout_len = static_cast<std::size_t>(std::ceil(std::log(1e-6) / std::log(mdp.gamma))) + 1;
  }
  const Matrix probs = pi.probs();
  const Matrix logp = pi.log_probs();
  auto sample_next = [&](std::size_t s, std::size_t a) -> long {
    // Missing sub-stochastic mass terminates the rollout.
    double u = rng.next_unit();
    for (std::size_t sp = 0; sp < mdp.n_states; ++sp) {
      u -= mdp.transition(s, a, sp);
      if (u < 0.0) return static_cast<long>(sp);
    }
    return -1;
  };
  auto sample_action = [&](std::size_t s) -> std::size_t {
    double u = rng.next_unit();
    for (std::size_t a = 0; a + 1 < mdp.n_actions; ++a) {
      u -= probs(s, a);
      if (u < 0.0) return a;
    }
    return mdp.n_actions - 1;
  };
  for (std::size_t s = 0; s < mdp.n_states; ++s) {
    for (std::size_t a = 0; a < mdp.n_actions; ++a) {
      double acc = 0.0;
      for (std::size_t m = 0; m < noise.samples; ++m) {
        double ret = mdp.reward(s, a);
        double discount = mdp.gamma;
        long state = sample_next(s, a);
        for (std::size_t h = 1; h < rollout_len && state >= 0; ++h) {
          const auto cur = static_cast<std::size_t>(state);
          const std::size_t act = sample_action(cur);
          ret += discount * (mdp.reward(cur, act) - tau * logp(cur, act));
          discount *= mdp.gamma;
          state = sample_next(cur, act);
        }
        acc += ret;
      }
      out.q(s, a) = acc / static_cast<double>(noise.samples);
      out.realized_deviation =
          std::max(out.realized_deviation, std::abs(out.q(s, a) - exact_q(s, a)));
    }
  }
  return out;
}

SoftmaxPolicy npg_step(const SoftmaxPolicy& pi, const Matrix& q_tau, double eta, double tau,
                       double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("npg_step: gamma not in (0,1)");
  if (tau > 0.0) {
    if (!(eta > 0.0 && eta <= (1.0 - gamma) / tau + 1e-15)) {
      throw std::invalid_argument("npg_step: eta outside (0, (1-gamma)/tau]");
    }
  } else if (!(eta > 0.0)) {
    throw std::invalid_argument("npg_step: eta must be > 0");
  }
  if (!pi.logits.same_shape(q_tau)) throw std::invalid_argument("npg_step: shape mismatch");

  const double keep = 1.0 - eta * tau / (1.0 - gamma);
  const double scale = eta / (1.0 - gamma);
  const Matrix logp = pi.log_probs();
  Matrix logits(q_tau.rows(), q_tau.cols(), 0.0);
  for (std::size_t s = 0; s < q_tau.rows(); ++s) {
    double mx = -1e300;
    for (std::size_t a = 0; a < q_tau.cols(); ++a) {
      logits(s, a) = keep * logp(s, a) + scale * q_tau(s, a);
      mx = std::max(mx, logits(s, a));
    }
    for (std::size_t a = 0; a < q_tau.cols(); ++a) logits(s, a) -= mx;  // re-center per state
  }
  return SoftmaxPolicy{std::move(logits)};
}

OptimizeResult optimize_future_policy(const MdpSnapshot& fmdp, const SoftmaxPolicy& pi0,
                                      std::size_t delta_pi, double eta, double tau,
                                      const EvalNoise& noise, Rng& rng, bool with_trace,
                                      double tol) {
  if (delta_pi < 1) throw std::invalid_argument("optimize_future_policy: delta_pi must be >= 1");
  OptimizeResult out;
  out.policy = pi0;

  Matrix q_star;
  if (with_trace) {
    q_star = optimal_values(fmdp, tau, tol).values.q;
  }
  std::vector<Matrix> prob_history;
  auto record_gap = [&](const Matrix& q_pi) {
    double gap = 0.0;
    for (std::size_t i = 0; i < q_pi.data().size(); ++i) {
      gap = std::max(gap, std::abs(q_star.data()[i] - q_pi.data()[i]));
    }
    out.q_gap_trace.push_back(gap);
  };

  for (std::size_t g = 0; g < delta_pi; ++g) {
    const ValueTable table = soft_policy_eval(fmdp, out.policy, tau, tol);
    if (with_trace) {
      record_gap(table.q);
      prob_history.push_back(out.policy.probs());
    }
    const PerturbedQ noisy = perturb_q(table.q, noise, rng, fmdp, out.policy, tau);
    out.max_noise_deviation = std::max(out.max_noise_deviation, noisy.realized_deviation);
    out.policy = npg_step(out.policy, noisy.q, eta, tau, fmdp.gamma);
  }
  if (with_trace) {
    const ValueTable final_table = soft_policy_eval(fmdp, out.policy, tau, tol);
    record_gap(final_table.q);
    prob_history.push_back(out.policy.probs());

    const Matrix final_probs = prob_history.back();
    for (const Matrix& probs : prob_history) {
      double kl = 0.0;
      for (std::size_t s = 0; s < probs.rows(); ++s) {
        for (std::size_t a = 0; a < probs.cols(); ++a) {
          const double p = probs(s, a);
          if (p > 0.0) kl += p * std::log(p / std::max(final_probs(s, a), 1e-300));
        }
      }
      out.kl_to_final.push_back(kl / static_cast<double>(probs.rows()));
    }
  }
  return out;
}

}  // namespace prost
