#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "prost/planner.hpp"
#include "prost/rng.hpp"

using namespace prost;

namespace {

MdpSnapshot single_state(double reward, double gamma, std::size_t horizon = 3) {
  MdpSnapshot snap;
  snap.n_states = 1;
  snap.n_actions = 1;
  snap.horizon = horizon;
  snap.gamma = gamma;
  snap.transition = Tensor3(1, 1, 1, 1.0);
  snap.reward = Matrix(1, 1, reward);
  return snap;
}

MdpSnapshot random_mdp(Rng& rng, std::size_t ns, std::size_t na, double gamma,
                       std::size_t horizon = 4) {
  MdpSnapshot snap;
  snap.n_states = ns;
  snap.n_actions = na;
  snap.horizon = horizon;
  snap.gamma = gamma;
  snap.transition = Tensor3(ns, na, ns, 0.0);
  snap.reward = Matrix(ns, na, 0.0);
  for (std::size_t s = 0; s < ns; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      double total = 0.0;
      std::vector<double> raw(ns);
      for (double& v : raw) {
        v = rng.uniform(0.05, 1.0);
        total += v;
      }
      for (std::size_t sp = 0; sp < ns; ++sp) snap.transition(s, a, sp) = raw[sp] / total;
      snap.reward(s, a) = rng.uniform(-1.0, 1.0);
    }
  }
  return snap;
}

double sup_diff(const Matrix& a, const Matrix& b) {
  double out = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) {
    out = std::max(out, std::abs(a.data()[i] - b.data()[i]));
  }
  return out;
}

// Expected H-step discounted return of a fixed policy, by direct recursion
// over the joint state distribution; independent of the backward-induction
// implementation.
double rollout_expectation(const MdpSnapshot& mdp, const Matrix& probs, std::size_t s0) {
  std::vector<double> dist(mdp.n_states, 0.0);
  dist[s0] = 1.0;
  double total = 0.0;
  double discount = 1.0;
  for (std::size_t h = 0; h < mdp.horizon; ++h) {
    std::vector<double> next(mdp.n_states, 0.0);
    for (std::size_t s = 0; s < mdp.n_states; ++s) {
      if (dist[s] == 0.0) continue;
      for (std::size_t a = 0; a < mdp.n_actions; ++a) {
        const double w = dist[s] * probs(s, a);
        total += discount * w * mdp.reward(s, a);
        for (std::size_t sp = 0; sp < mdp.n_states; ++sp) {
          next[sp] += w * mdp.transition(s, a, sp);
        }
      }
    }
    dist = std::move(next);
    discount *= mdp.gamma;
  }
  return total;
}

}  // namespace

TEST_CASE("soft policy evaluation closed cases") {
  const SoftmaxPolicy pi = SoftmaxPolicy::uniform(1, 1);
  const ValueTable v = soft_policy_eval(single_state(1.0, 0.5), pi, 0.0);
  CHECK(v.v[0] == doctest::Approx(2.0).epsilon(1e-12));

  // Entropy-only fixed point: V = tau log|A| / (1 - gamma).
  MdpSnapshot two_action = single_state(0.0, 0.8);
  two_action.n_actions = 2;
  two_action.transition = Tensor3(1, 2, 1, 1.0);
  two_action.reward = Matrix(1, 2, 0.0);
  const double tau = 0.3;
  const ValueTable soft = soft_policy_eval(two_action, SoftmaxPolicy::uniform(1, 2), tau);
  CHECK(soft.v[0] == doctest::Approx(tau * std::log(2.0) / 0.2).epsilon(1e-10));

  // A zero transition row contributes its reward only.
  MdpSnapshot absorbing = single_state(0.7, 0.9);
  absorbing.transition(0, 0, 0) = 0.0;
  absorbing.stochasticity_class = StochasticityClass::kSubStochastic;
  const ValueTable sub = soft_policy_eval(absorbing, pi, 0.0);
  CHECK(sub.q(0, 0) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("finite horizon evaluation closed cases") {
  const SoftmaxPolicy pi = SoftmaxPolicy::uniform(1, 1);
  MdpSnapshot one_step = single_state(1.0, 0.5, 1);
  const HorizonValues h1 = finite_horizon_eval(one_step, pi);
  CHECK(h1.v[0][0] == doctest::Approx(1.0));
  CHECK(h1.v[1][0] == 0.0);  // terminal condition

  const HorizonValues h3 = finite_horizon_eval(single_state(1.0, 0.5, 3), pi);
  CHECK(h3.v[0][0] == doctest::Approx(1.75).epsilon(1e-12));
}

TEST_CASE("finite horizon evaluation matches the distribution recursion") {
  Rng rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    const MdpSnapshot mdp = random_mdp(rng, 3, 2, 0.9, 4);
    Matrix logits(3, 2, 0.0);
    for (double& v : logits.data()) v = rng.uniform(-1.0, 1.0);
    const SoftmaxPolicy pi{logits};
    const HorizonValues values = finite_horizon_eval(mdp, pi);
    const Matrix probs = pi.probs();
    for (std::size_t s = 0; s < 3; ++s) {
      CHECK(values.v[0][s] == doctest::Approx(rollout_expectation(mdp, probs, s)).epsilon(1e-12));
    }
  }
}

TEST_CASE("optimal finite horizon matches exhaustive nonstationary enumeration") {
  Rng rng(43);
  const MdpSnapshot mdp = random_mdp(rng, 2, 2, 0.9, 3);
  const OptimalHorizonValues opt = optimal_finite_horizon(mdp);

  // Enumerate all h-dependent deterministic policies (2 states x 3 steps).
  double best = -1e300;
  for (int mask = 0; mask < 64; ++mask) {
    std::vector<std::vector<std::size_t>> actions(3, std::vector<std::size_t>(2));
    int bits = mask;
    for (int h = 0; h < 3; ++h) {
      for (int s = 0; s < 2; ++s) {
        actions[h][s] = bits & 1;
        bits >>= 1;
      }
    }
    std::vector<double> v(2, 0.0);
    for (int h = 2; h >= 0; --h) {
      std::vector<double> next(2, 0.0);
      for (int s = 0; s < 2; ++s) {
        const std::size_t a = actions[h][s];
        double q = mdp.reward(s, a);
        for (int sp = 0; sp < 2; ++sp) q += mdp.gamma * mdp.transition(s, a, sp) * v[sp];
        next[s] = q;
      }
      v = next;
    }
    best = std::max(best, v[0]);
  }
  CHECK(opt.values.v[0][0] == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("optimal values against policy enumeration") {
  Rng rng(47);
  const MdpSnapshot mdp = random_mdp(rng, 2, 2, 0.85);
  const OptimalValues opt = optimal_values(mdp, 0.0, 1e-11);
  double best = -1e300;
  for (int a0 = 0; a0 < 2; ++a0) {
    for (int a1 = 0; a1 < 2; ++a1) {
      // Exact evaluation of the deterministic stationary policy (a0, a1) by a
      // 2x2 linear solve written out directly.
      const double p00 = mdp.transition(0, a0, 0);
      const double p01 = mdp.transition(0, a0, 1);
      const double p10 = mdp.transition(1, a1, 0);
      const double p11 = mdp.transition(1, a1, 1);
      const double r0 = mdp.reward(0, a0);
      const double r1 = mdp.reward(1, a1);
      const double g = mdp.gamma;
      const double a = 1.0 - g * p00, b = -g * p01, c = -g * p10, d = 1.0 - g * p11;
      const double det = a * d - b * c;
      const double v0 = (d * r0 - b * r1) / det;
      best = std::max(best, v0);
    }
  }
  CHECK(opt.values.v[0] == doctest::Approx(best).epsilon(1e-9));

  // Action-indifferent rewards: optimal value equals any policy's value.
  MdpSnapshot indifferent = mdp;
  for (std::size_t s = 0; s < 2; ++s) {
    indifferent.reward(s, 1) = indifferent.reward(s, 0);
    for (std::size_t sp = 0; sp < 2; ++sp) {
      indifferent.transition(s, 1, sp) = indifferent.transition(s, 0, sp);
    }
  }
  const OptimalValues ind = optimal_values(indifferent, 0.0, 1e-11);
  const ValueTable uniform_v =
      soft_policy_eval(indifferent, SoftmaxPolicy::uniform(2, 2), 0.0);
  CHECK(ind.values.v[0] == doctest::Approx(uniform_v.v[0]).epsilon(1e-9));
}

TEST_CASE("large entropy regularization flattens the optimal policy") {
  Rng rng(53);
  const MdpSnapshot mdp = random_mdp(rng, 2, 3, 0.9);
  const OptimalValues soft = optimal_values(mdp, 50.0, 1e-11);
  const Matrix probs = soft.policy.probs();
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t a = 0; a < 3; ++a) {
      CHECK(probs(s, a) == doctest::Approx(1.0 / 3.0).epsilon(0.05));
    }
  }
}

TEST_CASE("soft and hard optima agree as tau vanishes") {
  Rng rng(59);
  for (int trial = 0; trial < 5; ++trial) {
    const MdpSnapshot mdp = random_mdp(rng, 3, 2, 0.9);
    const OptimalValues hard = optimal_values(mdp, 0.0, 1e-11);
    for (double tau : {0.1, 0.01}) {
      const OptimalValues soft = optimal_values(mdp, tau, 1e-11);
      double gap = 0.0;
      for (std::size_t s = 0; s < 3; ++s) {
        gap = std::max(gap, std::abs(soft.values.v[s] - hard.values.v[s]));
      }
      CHECK(gap <= tau * std::log(2.0) / (1.0 - mdp.gamma) + 1e-9);
    }
  }
}

TEST_CASE("perturb_q modes") {
  Rng rng(61);
  const MdpSnapshot mdp = random_mdp(rng, 2, 2, 0.9);
  const SoftmaxPolicy pi = SoftmaxPolicy::uniform(2, 2);
  const ValueTable exact = soft_policy_eval(mdp, pi, 0.0);

  EvalNoise none;
  const PerturbedQ same = perturb_q(exact.q, none, rng, mdp, pi, 0.0);
  CHECK(same.q.data() == exact.q.data());

  EvalNoise bounded{EvalNoise::Mode::kBoundedUniform, 0.1, 0, 0};
  for (int trial = 0; trial < 1000; ++trial) {
    const PerturbedQ noisy = perturb_q(exact.q, bounded, rng, mdp, pi, 0.0);
    CHECK(sup_diff(noisy.q, exact.q) <= 0.1);
  }

  // Monte-Carlo deviation shrinks with the sample count (median over seeds).
  std::vector<double> medians;
  for (std::size_t samples : {10ul, 100ul, 1000ul}) {
    std::vector<double> devs;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Rng mc_rng(seed);
      EvalNoise mc{EvalNoise::Mode::kMonteCarlo, 0.0, samples, 0};
      devs.push_back(perturb_q(exact.q, mc, mc_rng, mdp, pi, 0.0).realized_deviation);
    }
    std::sort(devs.begin(), devs.end());
    medians.push_back(devs[2]);
  }
  CHECK(medians[2] < medians[0]);
  CHECK(medians[2] < medians[1]);

  EvalNoise bad{EvalNoise::Mode::kMonteCarlo, 0.0, 0, 0};
  CHECK_THROWS_AS(perturb_q(exact.q, bad, rng, mdp, pi, 0.0), std::invalid_argument);
}

TEST_CASE("npg step arithmetic") {
  // Constant Q leaves the policy unchanged.
  SoftmaxPolicy pi = SoftmaxPolicy::uniform(1, 2);
  pi.logits(0, 0) = 0.3;
  Matrix q_const(1, 2, 0.7);
  const SoftmaxPolicy same = npg_step(pi, q_const, 0.5, 0.0, 0.5);
  CHECK(sup_diff(same.probs(), pi.probs()) < 1e-14);

  // tau = 0, uniform start, Q = (1, 0), eta/(1-gamma) = 1.
  Matrix q(1, 2, 0.0);
  q(0, 0) = 1.0;
  const SoftmaxPolicy stepped = npg_step(SoftmaxPolicy::uniform(1, 2), q, 0.5, 0.0, 0.5);
  const double e = std::exp(1.0);
  CHECK(stepped.probs()(0, 0) == doctest::Approx(e / (1.0 + e)).epsilon(1e-12));

  CHECK_THROWS_AS(npg_step(pi, q, 2.0, 0.5, 0.5), std::invalid_argument);  // eta > (1-g)/tau
  CHECK_THROWS_AS(npg_step(pi, q, 0.0, 0.0, 0.5), std::invalid_argument);
}

TEST_CASE("npg preserves the simplex and fixes the soft optimum") {
  Rng rng(67);
  const MdpSnapshot mdp = random_mdp(rng, 2, 2, 0.9);
  const double tau = 0.2;
  const OptimalValues soft = optimal_values(mdp, tau, 1e-12);
  const ValueTable at_opt = soft_policy_eval(mdp, soft.policy, tau, 1e-10);
  const SoftmaxPolicy next = npg_step(soft.policy, at_opt.q, 0.05, tau, mdp.gamma);
  CHECK(sup_diff(next.probs(), soft.policy.probs()) < 1e-9);

  for (int trial = 0; trial < 20; ++trial) {
    Matrix logits(2, 2, 0.0);
    for (double& v : logits.data()) v = rng.uniform(-3.0, 3.0);
    Matrix q_rand(2, 2, 0.0);
    for (double& v : q_rand.data()) v = rng.uniform(-2.0, 2.0);
    const SoftmaxPolicy out = npg_step(SoftmaxPolicy{logits}, q_rand, 0.1, tau, 0.9);
    const Matrix probs = out.probs();
    for (std::size_t s = 0; s < 2; ++s) {
      double row = 0.0;
      for (std::size_t a = 0; a < 2; ++a) {
        row += probs(s, a);
        CHECK(probs(s, a) > 0.0);
      }
      CHECK(row == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("optimize_future_policy loop contract") {
  Rng rng(71);
  const MdpSnapshot mdp = random_mdp(rng, 3, 2, 0.85);
  const SoftmaxPolicy pi0 = SoftmaxPolicy::uniform(3, 2);
  const double tau = 0.1;
  const double eta = (1.0 - mdp.gamma) / tau;
  EvalNoise none;
  CHECK_THROWS_AS(optimize_future_policy(mdp, pi0, 0, eta, tau, none, rng, false),
                  std::invalid_argument);

  Rng rng_a(5);
  const OptimizeResult one = optimize_future_policy(mdp, pi0, 1, eta, tau, none, rng_a, false);
  const ValueTable table = soft_policy_eval(mdp, pi0, tau);
  const SoftmaxPolicy manual = npg_step(pi0, table.q, eta, tau, mdp.gamma);
  CHECK(sup_diff(one.policy.probs(), manual.probs()) < 1e-14);
}

TEST_CASE("linear convergence bound of the entropy-regularized recursion") {
  Rng rng(73);
  for (int trial = 0; trial < 8; ++trial) {
    const double gamma = trial % 2 == 0 ? 0.8 : 0.9;
    const MdpSnapshot mdp = random_mdp(rng, 3, 2, gamma);
    const double tau = 0.15;
    const double eta = 0.6 * (1.0 - gamma) / tau;
    const SoftmaxPolicy pi0 = SoftmaxPolicy::uniform(3, 2);
    EvalNoise none;
    Rng loop_rng(trial);
    const OptimizeResult result =
        optimize_future_policy(mdp, pi0, 60, eta, tau, none, loop_rng, true, 1e-12);

    const OptimalValues star = optimal_values(mdp, tau, 1e-12);
    const ValueTable q0 = soft_policy_eval(mdp, pi0, tau, 1e-10);
    double log_gap = 0.0;
    const Matrix opt_logp = star.policy.log_probs();
    const Matrix pi0_logp = pi0.log_probs();
    for (std::size_t i = 0; i < opt_logp.data().size(); ++i) {
      log_gap = std::max(log_gap, std::abs(opt_logp.data()[i] - pi0_logp.data()[i]));
    }
    const double c1 = sup_diff(star.values.q, q0.q) +
                      2.0 * tau * (1.0 - eta * tau / (1.0 - gamma)) * log_gap;
    for (std::size_t g = 1; g < result.q_gap_trace.size(); ++g) {
      const double bound =
          gamma * std::pow(1.0 - eta * tau, static_cast<double>(g) - 1.0) * c1;
      CHECK(result.q_gap_trace[g] <= bound + 1e-9);
    }
  }
}

TEST_CASE("converged policy matches the optimal argmax") {
  Rng rng(79);
  const MdpSnapshot mdp = random_mdp(rng, 3, 2, 0.8);
  const double tau = 0.05;
  const double eta = (1.0 - mdp.gamma) / tau;
  EvalNoise none;
  Rng loop_rng(3);
  const OptimizeResult result = optimize_future_policy(mdp, SoftmaxPolicy::uniform(3, 2), 120,
                                                       eta, tau, none, loop_rng, false);
  const OptimalValues hard = optimal_values(mdp, 0.0, 1e-11);
  const Matrix probs = result.policy.probs();
  for (std::size_t s = 0; s < 3; ++s) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < 2; ++a) {
      if (probs(s, a) > probs(s, best)) best = a;
    }
    CHECK(best == hard.greedy[s]);
  }
}
