#include "prost/env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace prost {

std::size_t EnvDefinition::n_states() const { return base.n_states; }
std::size_t EnvDefinition::n_actions() const { return base.n_actions; }

double drift_value(const EnvDefinition& env, double t) {
  const double k = t / env.dt_unit;
  if (const auto* sine = std::get_if<SineDrift>(&env.source)) {
    return sine_drift(sine->speed, k);
  }
  if (const auto* file = std::get_if<FileDrift>(&env.source)) {
    const auto& series = file->series.clean;
    const auto idx = static_cast<std::size_t>(
        std::clamp(std::floor(k), 0.0, static_cast<double>(series.size() - 1)));
    return series[idx];
  }
  const auto& reacher = std::get<GoalReacherDrift>(env.source);
  return t / reacher.period_seconds;
}

MdpSnapshot apply_modulation(const EnvDefinition& env, double o) {
  if (env.reacher.has_value()) {
    // Phase o is the fraction of a full goal revolution; the snapshot
    // builder takes it directly through a unit period.
    return goal_reacher_snapshot(o, *env.reacher, 1.0);
  }
  MdpSnapshot snap = env.base;
  for (std::size_t s = 0; s < snap.n_states; ++s) {
    for (std::size_t a = 0; a < snap.n_actions; ++a) {
      snap.reward(s, a) = env.base.reward(s, a) + o * env.reward_drift(s, a);
    }
  }
  return snap;
}

MdpSnapshot snapshot_at(const EnvDefinition& env, double t) {
  if (t < 0.0 || t > env.wall_clock_horizon) {
    throw std::out_of_range("snapshot_at: t outside [0, T]");
  }
  return apply_modulation(env, drift_value(env, t));
}

std::size_t goal_reacher_cell(double x, double y, std::size_t grid_size) {
  const double cell = 2.0 / static_cast<double>(grid_size);
  auto index = [&](double v) {
    const auto i = static_cast<long>(std::floor((v + 1.0) / cell));
    return static_cast<std::size_t>(std::clamp<long>(i, 0, static_cast<long>(grid_size) - 1));
  };
  return index(y) * grid_size + index(x);
}

MdpSnapshot goal_reacher_snapshot(double k, const GoalReacherConfig& cfg,
                                  double period_episodes) {
  const std::size_t n = cfg.grid_size;
  const std::size_t n_states = n * n;
  constexpr std::size_t n_actions = 8;

  MdpSnapshot snap;
  snap.n_states = n_states;
  snap.n_actions = n_actions;
  snap.horizon = cfg.horizon;
  snap.gamma = cfg.gamma;
  snap.transition = Tensor3(n_states, n_actions, n_states, 0.0);
  snap.reward = Matrix(n_states, n_actions, 0.0);

  const double phase = 2.0 * std::numbers::pi * k / period_episodes;
  const std::size_t goal = goal_reacher_cell(cfg.goal_radius * std::cos(phase),
                                             cfg.goal_radius * std::sin(phase), n);

  auto clamp_cell = [&](long ix, long iy) {
    ix = std::clamp<long>(ix, 0, static_cast<long>(n) - 1);
    iy = std::clamp<long>(iy, 0, static_cast<long>(n) - 1);
    return static_cast<std::size_t>(iy) * n + static_cast<std::size_t>(ix);
  };

  // Compass steps for actions (cos(pi/4 * a), sin(pi/4 * a)), a = 0..7.
  static constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
  static constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

  for (std::size_t s = 0; s < n_states; ++s) {
    const long ix = static_cast<long>(s % n);
    const long iy = static_cast<long>(s / n);
    for (std::size_t a = 0; a < n_actions; ++a) {
      const std::size_t intended = clamp_cell(ix + kDx[a], iy + kDy[a]);
      snap.transition(s, a, intended) += 1.0 - cfg.p_slip;
      if (cfg.p_slip > 0.0) {
        const double slip_each = cfg.p_slip / 8.0;
        for (std::size_t d = 0; d < 8; ++d) {
          snap.transition(s, a, clamp_cell(ix + kDx[d], iy + kDy[d])) += slip_each;
        }
      }
      const double p_goal = snap.transition(s, a, goal);
      snap.reward(s, a) = cfg.step_reward + p_goal * (cfg.goal_reward - cfg.step_reward);
    }
  }
  return snap;
}

VariationBudget variation_budget(const std::vector<MdpSnapshot>& snapshots) {
  const BudgetSteps steps = budget_steps(snapshots);
  VariationBudget out;
  for (double v : steps.r_steps) out.b_r += v;
  for (double v : steps.p_steps) out.b_p += v;
  return out;
}

BudgetSteps budget_steps(const std::vector<MdpSnapshot>& snapshots) {
  if (snapshots.size() < 2) throw std::invalid_argument("budget_steps: need >= 2 snapshots");
  BudgetSteps out;
  for (std::size_t k = 0; k + 1 < snapshots.size(); ++k) {
    const MdpSnapshot& cur = snapshots[k];
    const MdpSnapshot& next = snapshots[k + 1];
    if (!cur.reward.same_shape(next.reward) || !cur.transition.same_shape(next.transition)) {
      throw std::invalid_argument("budget_steps: snapshot shape mismatch");
    }
    double sup_r = 0.0;
    double sup_p = 0.0;
    for (std::size_t s = 0; s < cur.n_states; ++s) {
      for (std::size_t a = 0; a < cur.n_actions; ++a) {
        sup_r = std::max(sup_r, std::abs(next.reward(s, a) - cur.reward(s, a)));
        double l1 = 0.0;
        for (std::size_t sp = 0; sp < cur.n_states; ++sp) {
          l1 += std::abs(next.transition(s, a, sp) - cur.transition(s, a, sp));
        }
        sup_p = std::max(sup_p, l1);
      }
    }
    out.r_steps.push_back(sup_r);
    out.p_steps.push_back(sup_p);
  }
  return out;
}

double BudgetProfile::b_r_at(double delta_pi) const {
  return b_r_unit * std::pow(delta_pi, alpha_r);
}

double BudgetProfile::b_p_at(double delta_pi) const {
  return b_p_unit * std::pow(delta_pi, alpha_p);
}

BudgetProfile estimate_budget_profile(const EnvDefinition& env,
                                      const std::vector<double>& strides,
                                      std::size_t episodes, double t1) {
  if (strides.empty() || episodes < 2) {
    throw std::invalid_argument("estimate_budget_profile: empty strides or too few episodes");
  }
  BudgetProfile profile;
  for (double stride : strides) {
    std::vector<MdpSnapshot> snaps;
    snaps.reserve(episodes);
    for (std::size_t k = 0; k < episodes; ++k) {
      const double t = std::min(t1 + stride * static_cast<double>(k), env.wall_clock_horizon);
      snaps.push_back(snapshot_at(env, t));
    }
    const VariationBudget budget = variation_budget(snaps);
    profile.b_r_samples.emplace_back(stride, budget.b_r);
    profile.b_p_samples.emplace_back(stride, budget.b_p);
  }
  {
    DriftSeries series;
    for (std::size_t k = 0; k < episodes; ++k) {
      const double t = std::min(t1 + static_cast<double>(k), env.wall_clock_horizon);
      series.clean.push_back(drift_value(env, t));
    }
    series.noisy = series.clean;
    profile.scalar = scalar_budget(series);
  }
  profile.b_r_unit = profile.b_r_samples.front().second;
  profile.b_p_unit = profile.b_p_samples.front().second;

  auto fit = [](const std::vector<std::pair<double, double>>& samples) {
    std::vector<std::pair<double, double>> positive;
    for (const auto& s : samples) {
      if (s.second > 0.0) positive.push_back(s);
    }
    if (positive.size() < 2) return 0.0;  // flat or absent budget: alpha = 0
    return fit_drifting_constant(positive);
  };
  profile.alpha_r = fit(profile.b_r_samples);
  profile.alpha_p = fit(profile.b_p_samples);
  return profile;
}

EnvDefinition make_chain_env(const ChainConfig& cfg, DriftSource source,
                             double wall_clock_horizon) {
  if (cfg.n_states < 2) throw std::invalid_argument("make_chain_env: need >= 2 states");
  const std::size_t n = cfg.n_states;
  MdpSnapshot base;
  base.n_states = n;
  base.n_actions = 2;
  base.horizon = cfg.horizon;
  base.gamma = cfg.gamma;
  base.transition = Tensor3(n, 2, n, 0.0);
  base.reward = Matrix(n, 2, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t left = s == 0 ? 0 : s - 1;
    const std::size_t right = s + 1 == n ? s : s + 1;
    base.transition(s, 0, left) += cfg.p_move;
    base.transition(s, 0, right) += 1.0 - cfg.p_move;
    base.transition(s, 1, right) += cfg.p_move;
    base.transition(s, 1, left) += 1.0 - cfg.p_move;
  }
  EnvDefinition env;
  env.base = base;
  env.reward_drift = Matrix(n, 2, 0.0);
  for (std::size_t s = 0; s < n; ++s) env.reward_drift(s, 1) = cfg.forward_reward;
  env.source = std::move(source);
  env.wall_clock_horizon = wall_clock_horizon;
  env.initial_state = 0;
  return env;
}

EnvDefinition make_goal_reacher_env(const GoalReacherConfig& cfg, double period_episodes,
                                    double wall_clock_horizon) {
  EnvDefinition env;
  env.base = goal_reacher_snapshot(0.0, cfg);
  env.reward_drift = Matrix(env.base.n_states, env.base.n_actions, 0.0);
  env.source = GoalReacherDrift{period_episodes};
  env.wall_clock_horizon = wall_clock_horizon;
  env.reacher = cfg;
  // Agent starts at the origin cell.
  env.initial_state = goal_reacher_cell(0.0, 0.0, cfg.grid_size);
  return env;
}

}  // namespace prost
