#include "prost/regret.hpp"

#include <cmath>
#include <stdexcept>

namespace prost {

RegretLedger dynamic_regret(const EnvDefinition& env, const std::vector<SoftmaxPolicy>& policies,
                            const std::vector<double>& times, const std::vector<double>& rho) {
  if (policies.size() != times.size()) {
    throw std::invalid_argument("dynamic_regret: one policy per interaction time required");
  }
  if (rho.size() != env.n_states()) {
    throw std::invalid_argument("dynamic_regret: rho size mismatch");
  }
  RegretLedger ledger;
  double cum = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const MdpSnapshot snap = snapshot_at(env, times[k]);
    const double v_star = optimal_finite_horizon(snap).values.value_at(rho);
    const double v_pi = finite_horizon_eval(snap, policies[k], 0.0).value_at(rho);
    RegretLedgerRow row;
    row.k = k + 1;
    row.t = times[k];
    row.v_star = v_star;
    row.v_pi = v_pi;
    row.gap = v_star - v_pi;
    cum += row.gap;
    row.cum_regret = cum;
    ledger.rows.push_back(row);
  }
  return ledger;
}

PredictionErrorRecord model_prediction_error(const MdpSnapshot& true_next,
                                             const MdpSnapshot& forecast,
                                             const SoftmaxPolicy& executed,
                                             const Trajectory& realized, double tol) {
  if (true_next.n_states != forecast.n_states || true_next.n_actions != forecast.n_actions) {
    throw std::invalid_argument("model_prediction_error: shape mismatch");
  }
  PredictionErrorRecord record;
  const HorizonValues hat = finite_horizon_eval(forecast, executed, 0.0);
  for (std::size_t h = 0; h < realized.size(); ++h) {
    const Step& step = realized[h];
    double exp_v = 0.0;
    for (std::size_t sp = 0; sp < true_next.n_states; ++sp) {
      exp_v += true_next.transition(step.state, step.action, sp) * hat.v[h + 1][sp];
    }
    const double iota = true_next.reward(step.state, step.action) + true_next.gamma * exp_v -
                        hat.q[h](step.state, step.action);
    record.iota_steps.push_back(iota);
    record.iota_kh_sum += iota;
  }

  const OptimalValues star = optimal_values(forecast, 0.0, tol);
  for (std::size_t s = 0; s < true_next.n_states; ++s) {
    for (std::size_t a = 0; a < true_next.n_actions; ++a) {
      double exp_v = 0.0;
      for (std::size_t sp = 0; sp < true_next.n_states; ++sp) {
        exp_v += true_next.transition(s, a, sp) * star.values.v[sp];
      }
      const double bar = true_next.reward(s, a) + true_next.gamma * exp_v - star.values.q(s, a);
      record.iota_bar_inf = std::max(record.iota_bar_inf, std::abs(bar));
    }
  }
  return record;
}

double c_i_of_budget(const HyperParams& hp, double b_r, double b_p) {
  const double one_minus = 1.0 - hp.gamma;
  return (1.0 / one_minus + static_cast<double>(hp.horizon)) * b_r +
         (1.0 + static_cast<double>(hp.horizon) * hp.r_hat_max()) * hp.gamma / one_minus * b_p;
}

double c_k_constant(const HyperParams& hp, std::size_t episodes) {
  const double h = static_cast<double>(hp.horizon);
  const double log_term = std::max(0.0, std::log(h / (hp.confidence * hp.lambda)));
  const double inner = static_cast<double>(hp.n_states) * std::sqrt(h * h / 2.0 * log_term) +
                       hp.lambda;
  const double bracket =
      hp.lambda * hp.r_max + 2.0 * hp.beta + hp.gamma * hp.r_hat_max() / (1.0 - hp.gamma) * inner;
  return static_cast<double>(episodes - 1) * std::sqrt(h) * bracket;
}

namespace {

double c_p_constant(const HyperParams& hp) {
  const double r = std::max(hp.r_max, hp.r_hat_max());
  return 4.0 * r / (1.0 - hp.gamma) *
         std::sqrt(static_cast<double>(hp.horizon) * std::log(4.0 / hp.confidence));
}

double c_alg_constant(const HyperParams& hp, std::size_t delta_pi) {
  const double one_minus = 1.0 - hp.gamma;
  const double r = std::max(hp.r_max, hp.r_hat_max());
  return (1.0 / (one_minus * one_minus) +
          std::log(static_cast<double>(hp.n_actions)) / hp.eta) /
             static_cast<double>(delta_pi) +
         4.0 * std::pow(hp.gamma, static_cast<double>(hp.horizon)) * r / one_minus;
}

double c_alg_tau_constant(const HyperParams& hp, std::size_t delta_pi, double c1) {
  const double one_minus = 1.0 - hp.gamma;
  const double r = std::max(hp.r_max, hp.r_hat_max());
  const double geometric =
      std::pow(1.0 - hp.eta * hp.tau, static_cast<double>(delta_pi) - 1.0) * c1;
  return (hp.gamma + 2.0) * (geometric + hp.c2()) +
         4.0 * std::pow(hp.gamma, static_cast<double>(hp.horizon)) * r / one_minus +
         2.0 * hp.tau * std::log(static_cast<double>(hp.n_actions)) / one_minus;
}

double r_i_bound(const HyperParams& hp, double c_i, double c_k, std::size_t episodes,
                 std::size_t window) {
  const double w = static_cast<double>(window);
  const double h = static_cast<double>(hp.horizon);
  return c_i * w + c_k * std::sqrt(1.0 / w * std::log(1.0 + h / hp.lambda * w)) +
         c_p_constant(hp) * std::sqrt(static_cast<double>(episodes - 1));
}

}  // namespace

BoundReport regret_bound(const HyperParams& hp, const BudgetProfile& budget, std::size_t episodes,
                         std::size_t delta_pi, std::size_t window,
                         std::optional<double> c1_exact, bool entropy_mode,
                         std::optional<double> measured_b_r,
                         std::optional<double> measured_b_p) {
  hp.validate();
  if (episodes < 2) throw std::invalid_argument("regret_bound: need >= 2 episodes");
  if (delta_pi < 1 || window < 1) throw std::invalid_argument("regret_bound: bad tempo/window");

  BoundReport report;
  report.confidence = hp.confidence;
  report.entropy_mode = entropy_mode;
  report.delta_pi = delta_pi;
  report.window = window;
  report.episodes = episodes;
  report.c1 = c1_exact.value_or(hp.c1_worst_case());
  report.c2 = hp.c2();
  report.c_p = c_p_constant(hp);
  report.c_k = c_k_constant(hp, episodes);
  report.b_r = measured_b_r.value_or(budget.b_r_at(static_cast<double>(delta_pi)));
  report.b_p = measured_b_p.value_or(budget.b_p_at(static_cast<double>(delta_pi)));
  report.c_i_of_b = c_i_of_budget(hp, report.b_r, report.b_p);
  report.c_alg = c_alg_constant(hp, delta_pi);
  report.c_alg_tau = c_alg_tau_constant(hp, delta_pi, report.c1);
  report.r_i_max = r_i_bound(hp, report.c_i_of_b, report.c_k, episodes, window);
  const double k_minus_one = static_cast<double>(episodes - 1);
  report.r_ii_max = (entropy_mode ? report.c_alg_tau : report.c_alg) * k_minus_one;
  report.total_bound = report.r_i_max + report.r_ii_max;

  for (std::size_t d = 1; d < episodes; ++d) {
    const double b_r = budget.b_r_at(static_cast<double>(d));
    const double b_p = budget.b_p_at(static_cast<double>(d));
    const double c_i = c_i_of_budget(hp, b_r, b_p);
    const std::size_t w = select_window(report.c_k, c_i, episodes - 1);
    report.r_i_curve.push_back(r_i_bound(hp, c_i, report.c_k, episodes, w));
    report.r_ii_curve.push_back(
        (entropy_mode ? c_alg_tau_constant(hp, d, report.c1) : c_alg_constant(hp, d)) *
        k_minus_one);
  }
  return report;
}

ConditionReport check_conditions(const HyperParams& hp, double epsilon, std::size_t episodes,
                                 double c1, double b_r_unit, double b_p_unit) {
  ConditionReport report;
  report.feas = feasible_tempo_set(hp, epsilon, episodes, c1);
  if (report.feas.delta_max > 0.0) {
    const double one_minus = 1.0 - hp.gamma;
    report.sample_recommendation =
        1.0 / (one_minus * one_minus * one_minus * report.feas.delta_max *
               report.feas.delta_max);
  }
  report.prop2_ratio = (b_r_unit + hp.r_hat_max() / (1.0 - hp.gamma) * b_p_unit) /
                       static_cast<double>(episodes);
  return report;
}

}  // namespace prost
