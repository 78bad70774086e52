#include <cmath>
#include <vector>

#include "doctest.h"
#include "prost/env.hpp"
#include "prost/rng.hpp"

using namespace prost;

namespace {

EnvDefinition sine_chain(int speed = 1, double horizon_t = 100.0) {
  return make_chain_env(ChainConfig{}, SineDrift{speed}, horizon_t);
}

// Independent 2-state backward induction over explicit action tables, used as
// the oracle for reward-flip checks.
double chain_optimal_value(const MdpSnapshot& snap, std::size_t s0) {
  std::vector<double> v(snap.n_states, 0.0);
  for (std::size_t h = 0; h < snap.horizon; ++h) {
    std::vector<double> next(snap.n_states, -1e300);
    for (std::size_t s = 0; s < snap.n_states; ++s) {
      for (std::size_t a = 0; a < snap.n_actions; ++a) {
        double q = snap.reward(s, a);
        for (std::size_t sp = 0; sp < snap.n_states; ++sp) {
          q += snap.gamma * snap.transition(s, a, sp) * v[sp];
        }
        next[s] = std::max(next[s], q);
      }
    }
    v = next;
  }
  return v[s0];
}

std::size_t chain_first_optimal_action(const MdpSnapshot& snap, std::size_t s0) {
  double best = -1e300;
  std::size_t best_a = 0;
  for (std::size_t a = 0; a < snap.n_actions; ++a) {
    std::vector<double> v(snap.n_states, 0.0);
    // Value of taking action a first, then acting optimally; inner values by
    // the oracle recursion above with one fewer step.
    MdpSnapshot inner = snap;
    inner.horizon = snap.horizon - 1;
    double q = snap.reward(s0, a);
    for (std::size_t sp = 0; sp < snap.n_states; ++sp) {
      q += snap.gamma * snap.transition(s0, a, sp) * chain_optimal_value(inner, sp);
    }
    if (q > best) {
      best = q;
      best_a = a;
    }
  }
  return best_a;
}

}  // namespace

TEST_CASE("snapshot_at is pure and exact-stochastic") {
  const EnvDefinition env = sine_chain(2);
  const MdpSnapshot a = snapshot_at(env, 12.5);
  const MdpSnapshot b = snapshot_at(env, 12.5);
  CHECK(a.reward.data() == b.reward.data());
  CHECK(a.transition.data() == b.transition.data());
  CHECK_NOTHROW(a.validate());
  CHECK_THROWS_AS(snapshot_at(env, -1.0), std::out_of_range);
  CHECK_THROWS_AS(snapshot_at(env, env.wall_clock_horizon + 1.0), std::out_of_range);
}

TEST_CASE("reward modulation scales the drifting component") {
  const EnvDefinition env = sine_chain();
  const MdpSnapshot zero = apply_modulation(env, 0.0);
  for (std::size_t s = 0; s < env.n_states(); ++s) {
    CHECK(zero.reward(s, 1) == 0.0);
  }
  const MdpSnapshot one = apply_modulation(env, 1.0);
  for (std::size_t s = 0; s < env.n_states(); ++s) {
    CHECK(one.reward(s, 1) == env.base.reward(s, 1) + env.reward_drift(s, 1));
  }
}

TEST_CASE("negative drift flips the optimal chain direction") {
  EnvDefinition env = sine_chain();
  MdpSnapshot forward = apply_modulation(env, 1.0);
  forward.horizon = 3;
  MdpSnapshot backward = apply_modulation(env, -1.0);
  backward.horizon = 3;
  CHECK(forward.reward(0, 1) == 1.0);
  CHECK(backward.reward(0, 1) == -1.0);
  CHECK(chain_first_optimal_action(forward, 0) == 1);
  CHECK(chain_first_optimal_action(backward, 0) == 0);
}

TEST_CASE("goal reacher geometry") {
  // Goal center (0.9, 0) lies in the half-open cell [0.8,1.0) x [0.0,0.2).
  CHECK(goal_reacher_cell(0.9, 0.0, 10) == 5 * 10 + 9);
  const GoalReacherConfig cfg;
  const MdpSnapshot at0 = goal_reacher_snapshot(0.0, cfg);
  CHECK_NOTHROW(at0.validate());
  CHECK(at0.n_states == 100);
  CHECK(at0.n_actions == 8);
  CHECK(at0.horizon == 13);
  CHECK(at0.gamma == 0.99);

  // Quarter period: center (0, 0.9).
  const MdpSnapshot at625 = goal_reacher_snapshot(625.0, cfg);
  const std::size_t goal = goal_reacher_cell(0.0, 0.9, 10);
  CHECK(goal == 9 * 10 + 5);
  // A step into the goal cell from its left neighbor pays out the goal reward
  // with the no-slip mass.
  bool found_goal_reward = false;
  for (std::size_t s = 0; s < at625.n_states && !found_goal_reward; ++s) {
    for (std::size_t a = 0; a < 8; ++a) {
      if (at625.transition(s, a, goal) > 0.9) {
        CHECK(at625.reward(s, a) > 5.0);
        found_goal_reward = true;
        break;
      }
    }
  }
  CHECK(found_goal_reward);
}

TEST_CASE("goal reacher with zero slip is deterministic") {
  GoalReacherConfig cfg;
  cfg.p_slip = 0.0;
  const MdpSnapshot snap = goal_reacher_snapshot(10.0, cfg);
  for (std::size_t s = 0; s < snap.n_states; ++s) {
    for (std::size_t a = 0; a < snap.n_actions; ++a) {
      std::size_t nonzero = 0;
      for (std::size_t sp = 0; sp < snap.n_states; ++sp) {
        if (snap.transition(s, a, sp) != 0.0) {
          ++nonzero;
          CHECK(snap.transition(s, a, sp) == 1.0);
        }
      }
      CHECK(nonzero == 1);
    }
  }
}

TEST_CASE("variation budget of identical snapshots is zero") {
  const EnvDefinition env = sine_chain();
  const std::vector<MdpSnapshot> snaps{snapshot_at(env, 3.0), snapshot_at(env, 3.0)};
  const VariationBudget budget = variation_budget(snaps);
  CHECK(budget.b_r == 0.0);
  CHECK(budget.b_p == 0.0);
}

TEST_CASE("variation budget picks up a single-entry change") {
  const EnvDefinition env = sine_chain();
  MdpSnapshot a = snapshot_at(env, 0.0);
  MdpSnapshot b = a;
  b.reward(1, 0) += 0.3;
  const VariationBudget budget = variation_budget({a, b});
  CHECK(budget.b_r == doctest::Approx(0.3));
  CHECK(budget.b_p == 0.0);
}

TEST_CASE("variation budget matches a brute-force oracle on random snapshots") {
  Rng rng(11);
  auto random_snapshot = [&rng]() {
    MdpSnapshot snap;
    snap.n_states = 3;
    snap.n_actions = 2;
    snap.horizon = 4;
    snap.gamma = 0.9;
    snap.transition = Tensor3(3, 2, 3, 0.0);
    snap.reward = Matrix(3, 2, 0.0);
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        double total = 0.0;
        std::vector<double> raw(3);
        for (double& v : raw) {
          v = rng.uniform(0.01, 1.0);
          total += v;
        }
        for (std::size_t sp = 0; sp < 3; ++sp) snap.transition(s, a, sp) = raw[sp] / total;
        snap.reward(s, a) = rng.uniform(-1.0, 1.0);
      }
    }
    return snap;
  };
  std::vector<MdpSnapshot> snaps{random_snapshot(), random_snapshot(), random_snapshot()};
  const VariationBudget budget = variation_budget(snaps);

  double oracle_r = 0.0;
  double oracle_p = 0.0;
  for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
    double best_r = 0.0;
    double best_p = 0.0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t a = 0; a < 2; ++a) {
        best_r = std::max(best_r,
                          std::abs(snaps[k + 1].reward(s, a) - snaps[k].reward(s, a)));
        double l1 = 0.0;
        for (std::size_t sp = 0; sp < 3; ++sp) {
          l1 += std::abs(snaps[k + 1].transition(s, a, sp) - snaps[k].transition(s, a, sp));
        }
        best_p = std::max(best_p, l1);
      }
    }
    oracle_r += best_r;
    oracle_p += best_p;
  }
  CHECK(budget.b_r == doctest::Approx(oracle_r).epsilon(1e-12));
  CHECK(budget.b_p == doctest::Approx(oracle_p).epsilon(1e-12));

  MdpSnapshot mismatched = snaps[0];
  mismatched.reward = Matrix(2, 2, 0.0);
  CHECK_THROWS_AS(variation_budget({snaps[0], mismatched}), std::invalid_argument);
}

TEST_CASE("rendered budget respects the Lipschitz bound of the scalar drift") {
  const EnvDefinition env = sine_chain(3);
  std::vector<MdpSnapshot> snaps;
  DriftSeries series;
  for (int k = 0; k < 20; ++k) {
    const double t = static_cast<double>(k);
    snaps.push_back(snapshot_at(env, t));
    series.clean.push_back(drift_value(env, t));
  }
  series.noisy = series.clean;
  double drift_cap = 0.0;
  for (double v : env.reward_drift.data()) drift_cap = std::max(drift_cap, std::abs(v));
  const VariationBudget budget = variation_budget(snaps);
  CHECK(budget.b_r <= drift_cap * scalar_budget(series) + 1e-12);
}

TEST_CASE("budget profile fits the sine drifting constant near one") {
  const EnvDefinition env = sine_chain(1, 400.0);
  const BudgetProfile profile = estimate_budget_profile(env, {1, 2, 3, 4, 5}, 30, 1.0);
  CHECK(profile.b_r_unit > 0.0);
  CHECK(profile.b_p_unit == 0.0);
  CHECK(profile.alpha_p == 0.0);
  // Sine sampled at small strides stretches roughly linearly.
  CHECK(profile.alpha_r > 0.5);
  CHECK(profile.alpha_r < 1.5);
  // Budgets nondecreasing in the stride.
  for (std::size_t i = 0; i + 1 < profile.b_r_samples.size(); ++i) {
    CHECK(profile.b_r_samples[i + 1].second >= profile.b_r_samples[i].second - 1e-12);
  }
}

TEST_CASE("file drift environments clamp the episode index") {
  DriftSeries series;
  series.clean = {0.5, 1.0, -1.0};
  series.noisy = series.clean;
  const EnvDefinition env = make_chain_env(ChainConfig{}, FileDrift{series}, 100.0);
  CHECK(drift_value(env, 0.0) == 0.5);
  CHECK(drift_value(env, 1.5) == 1.0);
  CHECK(drift_value(env, 50.0) == -1.0);
}
