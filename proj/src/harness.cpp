#include "prost/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>

#include "prost/csv.hpp"

namespace prost {

std::string to_string(ForecasterKind kind) {
  switch (kind) {
    case ForecasterKind::kSwLse: return "sw_lse";
    case ForecasterKind::kWLse: return "w_lse";
    case ForecasterKind::kScalarStructural: return "scalar_structural";
  }
  return "sw_lse";
}

std::string to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kProstT: return "prost_t";
    case AgentKind::kReactiveModel: return "reactive_model";
    case AgentKind::kFullHistory: return "full_history";
    case AgentKind::kOracleFuture: return "oracle_future";
    case AgentKind::kOnlineQFinetune: return "online_q_finetune";
  }
  return "prost_t";
}

AgentKind agent_kind_from_string(const std::string& name) {
  if (name == "prost_t") return AgentKind::kProstT;
  if (name == "reactive_model") return AgentKind::kReactiveModel;
  if (name == "full_history") return AgentKind::kFullHistory;
  if (name == "oracle_future") return AgentKind::kOracleFuture;
  if (name == "online_q_finetune") return AgentKind::kOnlineQFinetune;
  throw std::invalid_argument("unknown baseline kind: " + name);
}

EnvDefinition RunConfig::build_env() const {
  const std::size_t warmup = window;
  const double t_first = t1 >= 0.0 ? t1 : static_cast<double>((warmup + 1) * delta_pi);
  double horizon_t = wall_clock_horizon;
  if (horizon_t <= 0.0) {
    horizon_t = t_first + static_cast<double>(delta_pi) * static_cast<double>(episodes);
  }
  if (env_kind == "sine_chain") {
    return make_chain_env(chain, SineDrift{sine_speed}, horizon_t);
  }
  if (env_kind == "file_chain") {
    return make_chain_env(chain, FileDrift{load_drift_series(drift_file)}, horizon_t);
  }
  if (env_kind == "goal_reacher") {
    return make_goal_reacher_env(reacher, reacher_period_episodes, horizon_t);
  }
  throw std::invalid_argument("unknown env_kind: " + env_kind);
}

HyperParams RunConfig::resolved_hp(const EnvDefinition& env) const {
  HyperParams out = hp;
  out.n_states = env.n_states();
  out.n_actions = env.n_actions();
  out.horizon = env.base.horizon;
  out.gamma = env.base.gamma;
  out.total_wall_clock = env.wall_clock_horizon;
  // r_max over the drift range |o| <= 1.
  double r_max = 0.0;
  for (std::size_t s = 0; s < env.n_states(); ++s) {
    for (std::size_t a = 0; a < env.n_actions(); ++a) {
      r_max = std::max(r_max, std::abs(env.base.reward(s, a)) + std::abs(env.reward_drift(s, a)));
    }
  }
  out.r_max = r_max;
  out.r_tilde_max = r_max;
  if (auto_eta) {
    out.eta = out.tau > 0.0 ? (1.0 - out.gamma) / out.tau : 1.0;
  }
  if (auto_beta) {
    out.beta = std::max(beta_floor(out.lambda, out.gamma, out.r_max, out.n_states, out.horizon,
                                   out.confidence),
                        1e-3);
  }
  out.validate();
  return out;
}

void RunConfig::validate() const {
  if (episodes < 2) throw std::invalid_argument("config: need episodes >= 2");
  if (delta_pi < 1) throw std::invalid_argument("config: delta_pi must be >= 1");
  if (window < 1) throw std::invalid_argument("config: window must be >= 1");
  if (drift_noise_bound < 0.0) throw std::invalid_argument("config: noise bound must be >= 0");
  if (env_kind != "sine_chain" && env_kind != "file_chain" && env_kind != "goal_reacher") {
    throw std::invalid_argument("config: unknown env_kind " + env_kind);
  }
  if (env_kind == "file_chain" && drift_file.empty()) {
    throw std::invalid_argument("config: file_chain requires drift_file");
  }
}

std::vector<double> initial_distribution(const EnvDefinition& env) {
  std::vector<double> rho(env.n_states(), 0.0);
  rho[env.initial_state] = 1.0;
  return rho;
}

namespace {

std::string policy_digest(const SoftmaxPolicy& pi) {
  const Matrix probs = pi.probs();
  std::uint64_t hash = 1469598103934665603ull;  // FNV-1a
  for (double v : probs.data()) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(v));
    std::memcpy(&bits, &v, sizeof(bits));
    for (int byte = 0; byte < 8; ++byte) {
      hash ^= (bits >> (8 * byte)) & 0xff;
      hash *= 1099511628211ull;
    }
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

Trajectory rollout(const MdpSnapshot& mdp, const SoftmaxPolicy& pi, std::size_t start, Rng& rng) {
  const Matrix probs = pi.probs();
  Trajectory traj;
  traj.reserve(mdp.horizon);
  std::size_t state = start;
  for (std::size_t h = 0; h < mdp.horizon; ++h) {
    double u = rng.next_unit();
    std::size_t action = mdp.n_actions - 1;
    for (std::size_t a = 0; a + 1 < mdp.n_actions; ++a) {
      u -= probs(state, a);
      if (u < 0.0) {
        action = a;
        break;
      }
    }
    u = rng.next_unit();
    std::size_t next = mdp.n_states - 1;
    for (std::size_t sp = 0; sp + 1 < mdp.n_states; ++sp) {
      u -= mdp.transition(state, action, sp);
      if (u < 0.0) {
        next = sp;
        break;
      }
    }
    traj.push_back({state, action, mdp.reward(state, action), next});
    state = next;
  }
  return traj;
}

struct PendingForecast {
  bool active = false;
  MdpSnapshot model;  // planning model used for episode k+1
};

RunRecord run_agent(const RunConfig& config, AgentKind kind) {
  config.validate();
  const EnvDefinition env = config.build_env();
  const HyperParams hp = config.resolved_hp(env);
  const std::size_t h_steps = env.base.horizon;
  const double gamma = env.base.gamma;

  RunRecord record;
  record.config = config;
  record.agent = kind;
  record.hp = hp;

  if (config.plan_source == PlanSource::kTempoOptimizer) {
    record.plan = plan_tempo(config);
  } else {
    const double t_first =
        config.t1 >= 0.0 ? config.t1
                         : static_cast<double>((config.window + 1) * config.delta_pi);
    double horizon_t = config.wall_clock_horizon;
    if (horizon_t <= 0.0) {
      horizon_t = t_first + static_cast<double>(config.delta_pi) *
                                static_cast<double>(config.episodes);
    }
    record.plan = make_plan(horizon_t, config.delta_pi, t_first);
    if (record.plan.times.size() > config.episodes) {
      record.plan.times.resize(config.episodes);
    }
  }
  const std::vector<double>& times = record.plan.times;
  const std::size_t total_episodes = times.size();
  if (total_episodes < 2) throw std::runtime_error("run: plan yields fewer than 2 episodes");
  const double delta_pi_t = static_cast<double>(record.plan.delta_pi_star);

  Rng rng(config.seed);
  const std::vector<double> rho = initial_distribution(env);
  VisitStats stats(env.n_states(), env.n_actions(), h_steps);
  std::vector<double> observed;  // noisy drift observations, warm-up first

  // Warm-up: `window` uniform-policy episodes before t1, excluded from the
  // regret accounting but included in the estimator windows.
  const SoftmaxPolicy uniform = SoftmaxPolicy::uniform(env.n_states(), env.n_actions());
  const std::size_t warmup = config.window;
  for (std::size_t j = 0; j < warmup; ++j) {
    const double t =
        std::max(0.0, times.front() - static_cast<double>(warmup - j) * delta_pi_t);
    record.warmup_times.push_back(t);
    const MdpSnapshot snap = snapshot_at(env, t);
    Trajectory warm_traj = rollout(snap, uniform, env.initial_state, rng);
    stats.record_trajectory(warm_traj);
    record.warmup_trajectories.push_back(std::move(warm_traj));
    const double o = drift_value(env, t);
    observed.push_back(o + (config.drift_noise_bound > 0.0
                                ? rng.uniform(-config.drift_noise_bound, config.drift_noise_bound)
                                : 0.0));
  }

  // Q-learning state for the online fine-tune baseline.
  Matrix q_learn(env.n_states(), env.n_actions(), 0.0);
  const bool q_finetune = kind == AgentKind::kOnlineQFinetune;

  std::vector<MdpSnapshot> true_snaps;
  true_snaps.reserve(total_episodes);
  for (double t : times) true_snaps.push_back(snapshot_at(env, t));

  SoftmaxPolicy policy = q_finetune ? SoftmaxPolicy::greedy_from(q_learn) : uniform;
  PendingForecast pending;
  double cum_regret = 0.0;
  double return_tail = 0.0;
  std::vector<double> returns;

  for (std::size_t k = 1; k <= total_episodes; ++k) {
    const double t_k = times[k - 1];
    const MdpSnapshot& truth = true_snaps[k - 1];

    record.event_log.push_back("execute k=" + std::to_string(k));
    const Trajectory traj = rollout(truth, policy, env.initial_state, rng);
    record.trajectories.push_back(traj);

    record.event_log.push_back("observe k=" + std::to_string(k));
    const double o_clean = drift_value(env, t_k);
    const double o_noisy =
        o_clean + (config.drift_noise_bound > 0.0
                       ? rng.uniform(-config.drift_noise_bound, config.drift_noise_bound)
                       : 0.0);

    record.event_log.push_back("update k=" + std::to_string(k));
    stats.record_trajectory(traj);
    observed.push_back(o_noisy);

    EpisodeRow row;
    row.k = k;
    row.t = t_k;
    row.o_clean = o_clean;
    row.o_noisy = o_noisy;
    for (const Step& step : traj) row.realized_return += step.reward;
    returns.push_back(row.realized_return);

    row.v_star = optimal_finite_horizon(truth).values.value_at(rho);
    row.v_pi = finite_horizon_eval(truth, policy, 0.0).value_at(rho);
    row.gap = row.v_star - row.v_pi;
    cum_regret += row.gap;
    row.cum_regret = cum_regret;
    row.policy_digest = policy_digest(policy);
    if (config.record_policies) record.policy_logits.push_back(policy.logits.data());

    if (pending.active && config.record_prediction_errors) {
      const PredictionErrorRecord err =
          model_prediction_error(truth, pending.model, policy, traj);
      row.iota_kh_sum = err.iota_kh_sum;
      row.iota_bar_inf = err.iota_bar_inf;
    }

    if (k < total_episodes && kind != AgentKind::kOnlineQFinetune) {
      // Build the planning model for episode k+1.
      record.event_log.push_back("forecast k=" + std::to_string(k));
      const std::size_t stats_k = stats.episodes_recorded();
      const std::size_t w_used = config.forecaster == ForecasterKind::kScalarStructural
                                     ? config.scalar.window
                                     : std::min(config.window, stats_k);
      MdpSnapshot model;
      Matrix model_reward_for_diag;
      double mean_bonus = 0.0;
      if (kind == AgentKind::kOracleFuture) {
        model = true_snaps[k];
        model_reward_for_diag = model.reward;
      } else {
        const bool reactive = kind == AgentKind::kReactiveModel;
        const bool full_history = kind == AgentKind::kFullHistory;
        switch (config.forecaster) {
          case ForecasterKind::kSwLse: {
            const std::size_t w_eff = full_history ? stats_k : w_used;
            const ForecastedMdp fc = forecast_sw_lse(stats, stats_k, w_eff, hp.lambda, hp.beta);
            model = fc.as_snapshot(h_steps, gamma);
            model_reward_for_diag = fc.r_tilde;
            for (double b : fc.bonus.data()) mean_bonus += b;
            mean_bonus /= static_cast<double>(fc.bonus.data().size());
            break;
          }
          case ForecasterKind::kWLse: {
            const WlseSolution sol = w_lse_forecast(stats, stats_k, hp.lambda, config.wlse);
            model.n_states = env.n_states();
            model.n_actions = env.n_actions();
            model.horizon = h_steps;
            model.gamma = gamma;
            model.transition = sol.p_hat;
            model.reward = sol.r_tilde;
            model.stochasticity_class = StochasticityClass::kSubStochastic;
            model_reward_for_diag = sol.r_tilde;
            break;
          }
          case ForecasterKind::kScalarStructural: {
            const std::size_t w_eff = full_history
                                          ? observed.size()
                                          : std::min<std::size_t>(config.scalar.window,
                                                                  observed.size());
            double o_target;
            if (reactive) {
              o_target = o_noisy;
            } else {
              ScalarForecaster f = config.scalar;
              f.window = w_eff;
              const std::span<const double> win(observed.data() + observed.size() - w_eff,
                                                w_eff);
              o_target = scalar_forecast(f, win).value;
            }
            model = structural_g(env, o_target);
            model_reward_for_diag = model.reward;
            break;
          }
        }
      }
      row.mean_bonus = mean_bonus;
      // Forecast diagnostics against the true next snapshot.
      const MdpSnapshot& next_truth = true_snaps[k];
      for (std::size_t s = 0; s < env.n_states(); ++s) {
        for (std::size_t a = 0; a < env.n_actions(); ++a) {
          row.max_reward_error =
              std::max(row.max_reward_error,
                       std::abs(model_reward_for_diag(s, a) - next_truth.reward(s, a)));
          double l1 = 0.0;
          for (std::size_t sp = 0; sp < env.n_states(); ++sp) {
            l1 += std::abs(model.transition(s, a, sp) - next_truth.transition(s, a, sp));
          }
          row.max_p_row_l1_error = std::max(row.max_p_row_l1_error, l1);
        }
      }

      record.event_log.push_back("optimize k=" + std::to_string(k));
      const SoftmaxPolicy& start = config.cold_start ? uniform : policy;
      const OptimizeResult opt =
          optimize_future_policy(model, start, record.plan.delta_pi_star, hp.eta, hp.tau,
                                 config.noise, rng, config.record_convergence_trace);
      if (config.record_convergence_trace) {
        record.q_gap_traces.push_back(opt.q_gap_trace);
        record.kl_traces.push_back(opt.kl_to_final);
      }
      policy = opt.policy;
      pending.active = true;
      pending.model = model;
      record.event_log.push_back("advance k=" + std::to_string(k));
    } else if (k < total_episodes) {
      // Online Q-learning fine-tune on the single realized trajectory.
      for (const Step& step : traj) {
        double best_next = q_learn(step.next_state, 0);
        for (std::size_t a = 1; a < env.n_actions(); ++a) {
          best_next = std::max(best_next, q_learn(step.next_state, a));
        }
        q_learn(step.state, step.action) +=
            config.q_learning_step *
            (step.reward + gamma * best_next - q_learn(step.state, step.action));
      }
      policy = SoftmaxPolicy::greedy_from(q_learn);
      pending.active = false;
      record.event_log.push_back("advance k=" + std::to_string(k));
    }
    record.rows.push_back(row);
  }

  record.measured_steps = budget_steps(true_snaps);
  for (double v : record.measured_steps.r_steps) record.b_r_measured += v;
  for (double v : record.measured_steps.p_steps) record.b_p_measured += v;
  record.cumulative_regret = cum_regret;
  const std::size_t tail = std::min<std::size_t>(10, returns.size());
  for (std::size_t i = returns.size() - tail; i < returns.size(); ++i) return_tail += returns[i];
  record.mean_last10_reward = return_tail / static_cast<double>(tail);
  return record;
}

}  // namespace

RunRecord run_prost_t(const RunConfig& config) { return run_agent(config, AgentKind::kProstT); }

RunRecord run_baseline(const RunConfig& config, AgentKind kind) {
  return run_agent(config, kind);
}

TempoPlan plan_tempo(const RunConfig& config) {
  config.validate();
  const EnvDefinition env = config.build_env();
  const HyperParams hp = config.resolved_hp(env);
  const std::size_t episodes = config.episodes;

  const BudgetProfile profile =
      estimate_budget_profile(env, {1.0, 2.0, 3.0, 4.0, 5.0}, episodes, 1.0);
  const double alpha_max = std::max(profile.alpha_r, profile.alpha_p);
  const double c1 = hp.c1_worst_case();
  const double eta_tau = hp.eta * hp.tau;
  const double k_env = alpha_max * alpha_max * c_i_of_budget(hp, profile.b_r_unit,
                                                             profile.b_p_unit);
  const double k_agent = std::log(1.0 / (1.0 - eta_tau)) * c1 *
                         static_cast<double>(episodes - 1) * (hp.gamma + 2.0);

  const TempoFeasibility feas = feasible_tempo_set(hp, hp.epsilon, episodes, c1);
  if (feas.empty) {
    throw std::runtime_error("plan_tempo: feasible tempo set is empty (n_min = " +
                             std::to_string(feas.n_min) + ", K = " + std::to_string(episodes) +
                             ")");
  }
  const double c_k = c_k_constant(hp, episodes);
  auto bound_fn = [&](std::size_t d) {
    const double c_i =
        c_i_of_budget(hp, profile.b_r_at(static_cast<double>(d)),
                      profile.b_p_at(static_cast<double>(d)));
    const std::size_t w = select_window(c_k, c_i, episodes - 1);
    return regret_bound(hp, profile, episodes, d, w).total_bound;
  };
  const std::size_t star = tempo_numeric(bound_fn, feas.candidates());

  TempoPlan plan = make_plan(env.wall_clock_horizon, star,
                             config.t1 >= 0.0 ? config.t1 : static_cast<double>(star));
  if (plan.times.size() > episodes) plan.times.resize(episodes);
  plan.k_env = k_env;
  plan.k_agent = k_agent;
  plan.bound_at_star = bound_fn(star);
  plan.case_id = "numeric";
  if (alpha_max == 0.0) {
    plan.case_id = "case1";
  } else if (std::abs(alpha_max - 1.0) < 1e-9) {
    plan.case_id = "case2";
  } else if (k_env > 0.0 && std::abs(k_agent - (1.0 - eta_tau) * k_env) <= 1e-6 * k_env) {
    plan.case_id = "case3";
  }
  return plan;
}

BoundReport bounds_for_record(const RunRecord& record) {
  const EnvDefinition env = record.config.build_env();
  const std::size_t episodes = record.plan.times.size();
  const BudgetProfile profile =
      estimate_budget_profile(env, {1.0, 2.0, 3.0, 4.0, 5.0}, episodes, 1.0);
  const std::size_t window = std::min(record.config.window, episodes);
  return regret_bound(record.hp, profile, episodes, record.plan.delta_pi_star, window,
                      std::nullopt, record.hp.tau > 0.0, record.b_r_measured,
                      record.b_p_measured);
}

}  // namespace prost
