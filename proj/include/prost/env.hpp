#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "prost/drift.hpp"
#include "prost/mdp.hpp"

namespace prost {

// Drift sources. The scalar parameter o is indexed by wall-clock time t via
// o(t) = generator evaluated at t / dt_unit, with dt_unit = one policy
// iteration second, so plans with different tempos sample the same underlying
// drift at different rates.
struct SineDrift {
  int speed = 1;
};

struct FileDrift {
  // Episode index floor(t / dt_unit) is clamped to the series range.
  DriftSeries series;
};

struct GoalReacherDrift {
  // o(t) = t / period_seconds, the unwrapped phase of the moving goal.
  double period_seconds = 2500.0;
};

using DriftSource = std::variant<SineDrift, FileDrift, GoalReacherDrift>;

struct GoalReacherConfig {
  std::size_t grid_size = 10;
  std::size_t horizon = 13;
  double gamma = 0.99;
  double goal_reward = 6.0;
  double step_reward = -0.5;
  double goal_radius = 0.9;
  double p_slip = 0.1;
};

// A time-elapsing tabular environment: a base snapshot (static reward part
// plus transition), a drifting reward template, and a drift source. The
// rendered reward at time t is reward_static + o(t) * reward_drift, except
// for the goal reacher whose snapshot is rebuilt from the phase o(t).
struct EnvDefinition {
  MdpSnapshot base;      // reward field holds the static component
  Matrix reward_drift;   // drifting template, scaled by o(t)
  DriftSource source;
  double wall_clock_horizon = 0.0;  // T
  double dt_unit = 1.0;
  std::size_t initial_state = 0;
  std::optional<GoalReacherConfig> reacher;  // set iff source is GoalReacherDrift

  std::size_t n_states() const;
  std::size_t n_actions() const;
};

// Scalar drift value o(t) of the environment's source.
double drift_value(const EnvDefinition& env, double t);

// Applies the environment's modulation rule with an arbitrary parameter o.
// This is also the structural half g of the MDP forecaster: g(o_hat) is the
// predicted future MDP when the drift structure is known.
MdpSnapshot apply_modulation(const EnvDefinition& env, double o);

// Exact-stochastic snapshot at wall-clock time t in [0, T]. Pure: identical
// arguments yield bit-identical snapshots.
MdpSnapshot snapshot_at(const EnvDefinition& env, double t);

// 10x10 discretization of the 2D goal reacher at episode index k (k may be
// fractional; the goal phase is 2*pi*k / period_episodes).
MdpSnapshot goal_reacher_snapshot(double k, const GoalReacherConfig& cfg,
                                  double period_episodes = 2500.0);

// Grid cell containing (x, y) under half-open cells [x, x+2/n) with the last
// cell closed; returns the flat state index.
std::size_t goal_reacher_cell(double x, double y, std::size_t grid_size);

// Time-elapsing variation budgets over a snapshot sequence:
//   B_p = sum_k sup_{s,a} ||P_{k+1}(.|s,a) - P_k(.|s,a)||_1
//   B_r = sum_k sup_{s,a} |R_{k+1}(s,a) - R_k(s,a)|
struct VariationBudget {
  double b_r = 0.0;
  double b_p = 0.0;
};

VariationBudget variation_budget(const std::vector<MdpSnapshot>& snapshots);

// Per-step sup-norm changes between consecutive snapshots; used for the local
// windowed budgets of the deterministic forecaster bounds.
struct BudgetSteps {
  std::vector<double> r_steps;  // r_steps[k] = sup |R_{k+1} - R_k|
  std::vector<double> p_steps;  // p_steps[k] = sup ||P_{k+1) - P_k||_1
};

BudgetSteps budget_steps(const std::vector<MdpSnapshot>& snapshots);

// Budgets B(delta_pi) as functions of the interaction interval, plus the
// fitted drifting constants.
struct BudgetProfile {
  std::vector<std::pair<double, double>> b_r_samples;  // (delta_pi, B_r)
  std::vector<std::pair<double, double>> b_p_samples;
  double scalar = 0.0;      // sum |o_{k+1} - o_k| at delta_pi = 1
  double alpha_r = 0.0;
  double alpha_p = 0.0;
  double b_r_unit = 0.0;    // B_r(1)
  double b_p_unit = 0.0;    // B_p(1)

  double b_r_at(double delta_pi) const;  // B_r(1) * delta_pi^alpha_r
  double b_p_at(double delta_pi) const;
};

// Measures budgets by rendering snapshots at times t1 + delta_pi*(k-1),
// k = 1..K, for each stride delta_pi in strides, then fits the drifting
// constants on the positive samples.
BudgetProfile estimate_budget_profile(const EnvDefinition& env,
                                      const std::vector<double>& strides,
                                      std::size_t episodes, double t1);

// Convenience builders for the environments used throughout.
struct ChainConfig {
  std::size_t n_states = 2;
  std::size_t horizon = 8;
  double gamma = 0.9;
  double p_move = 0.9;          // probability the chosen direction succeeds
  double forward_reward = 1.0;  // drifting template on the forward action
};

// Two-action drifting chain: action 1 steps right, action 0 steps left, with
// success probability p_move. The drifting reward template pays
// forward_reward on action 1 in every state and 0 on action 0, so the sign
// of o flips the optimal direction.
EnvDefinition make_chain_env(const ChainConfig& cfg, DriftSource source,
                             double wall_clock_horizon);

EnvDefinition make_goal_reacher_env(const GoalReacherConfig& cfg, double period_episodes,
                                    double wall_clock_horizon);

}  // namespace prost
