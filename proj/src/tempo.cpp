#include "prost/tempo.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace prost {

namespace {

constexpr double kInvE = 0.36787944117144233;  // 1/e
constexpr double kResidualTol = 1e-12;

double halley(double x, double w) {
  for (int iter = 0; iter < 200; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= kResidualTol) return w;
    const double fp = ew * (w + 1.0);
    const double fpp = ew * (w + 2.0);
    double denom = fp - 0.5 * f * fpp / fp;
    if (denom == 0.0) denom = fp != 0.0 ? fp : 1e-300;
    double step = f / denom;
    // Damping: never let the iterate cross the branch point at w = -1.
    double next = w - step;
    while ((w > -1.0 && next < -1.0) || (w < -1.0 && next > -1.0)) {
      step *= 0.5;
      next = w - step;
    }
    if (next == w) break;  // stalled at double precision
    w = next;
  }
  const double residual = std::abs(w * std::exp(w) - x);
  if (residual > kResidualTol) {
    throw std::runtime_error("lambert_w: Halley iteration did not reach tolerance");
  }
  return w;
}

double principal_seed(double x) {
  if (x > 2.0 * std::exp(1.0)) {
    const double l = std::log(x);
    const double ll = std::log(l);
    return l - ll + ll / l;
  }
  if (x > 0.5) return std::log1p(x);  // mid-range: close enough for Halley
  if (x < -0.3) {
    // Series around the branch point, p = sqrt(2 (1 + e x)).
    const double p = std::sqrt(std::max(0.0, 2.0 * (1.0 + x / kInvE)));
    return -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p;
  }
  return x * (1.0 + x * (-1.0 + x * (1.5 - 8.0 / 3.0 * x)));
}

double lower_seed(double x) {
  if (x > -0.27) {
    const double l = std::log(-x);
    const double ll = std::log(-l);
    return l - ll + ll / l;
  }
  const double p = std::sqrt(std::max(0.0, 2.0 * (1.0 + x / kInvE)));
  return -1.0 - p - p * p / 3.0 - 11.0 / 72.0 * p * p * p;
}

}  // namespace

double lambert_w(double x, LambertBranch branch) {
  if (!std::isfinite(x)) throw std::invalid_argument("lambert_w: non-finite argument");
  // Tiny floating slack below -1/e covers arguments computed as -exp(-1).
  if (x < -kInvE - 1e-15) {
    throw std::domain_error("lambert_w: argument below -1/e");
  }
  if (x <= -kInvE + 5e-17) return -1.0;
  if (branch == LambertBranch::kPrincipal) {
    if (x == 0.0) return 0.0;
    return halley(x, principal_seed(x));
  }
  if (x >= 0.0) throw std::domain_error("lambert_w: lower branch requires x < 0");
  return halley(x, lower_seed(x));
}

double HyperParams::r_hat_max() const { return r_tilde_max + 2.0 * beta / std::sqrt(lambda); }

double HyperParams::c1_worst_case() const {
  return r_hat_max() * (1.0 + gamma) / (1.0 - gamma) +
         2.0 * tau * (1.0 - eta * tau / (1.0 - gamma)) * theta_log_cap;
}

double HyperParams::c2() const {
  if (delta == 0.0) return 0.0;
  return 2.0 * delta / (1.0 - gamma) * (1.0 + gamma / (eta * tau));
}

void HyperParams::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("hp: gamma not in (0,1)");
  if (lambda < 1.0) throw std::invalid_argument("hp: lambda must be >= 1");
  if (!(confidence > 0.0 && confidence < 1.0)) throw std::invalid_argument("hp: p not in (0,1)");
  if (delta < 0.0) throw std::invalid_argument("hp: delta must be >= 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("hp: epsilon must be > 0");
  if (tau > 0.0) {
    if (!(eta > 0.0 && eta <= (1.0 - gamma) / tau + 1e-15)) {
      throw std::invalid_argument("hp: eta outside (0, (1-gamma)/tau]");
    }
  } else if (!(eta > 0.0)) {
    throw std::invalid_argument("hp: eta must be > 0");
  }
  if (horizon < 1 || n_actions < 1 || n_states < 1) {
    throw std::invalid_argument("hp: empty horizon or spaces");
  }
}

TempoFeasibility feasible_tempo_set(const HyperParams& hp, double epsilon, std::size_t k_total,
                                    double c1) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("feasible_tempo_set: epsilon must be > 0");
  hp.validate();
  TempoFeasibility out;
  const double eta_tau = hp.eta * hp.tau;
  if (!(eta_tau > 0.0)) {
    throw std::invalid_argument("feasible_tempo_set: requires entropy regularization (tau > 0)");
  }
  const double log_arg = c1 * (hp.gamma + 2.0) / epsilon;
  if (log_arg > 1.0) {
    out.n_min = static_cast<std::size_t>(std::ceil(std::log(log_arg) / eta_tau)) + 1;
  } else {
    out.n_min = 1;
  }
  out.n_max = k_total >= 2 ? k_total - 1 : 0;
  out.empty = out.n_min > out.n_max;

  out.delta_max =
      epsilon / ((hp.gamma + 2.0) * 2.0 / (1.0 - hp.gamma) * (1.0 + hp.gamma / eta_tau));
  out.h_min = 1.0 / (1.0 - hp.gamma) *
              std::log(2.0 * hp.r_hat_max() / ((1.0 - hp.gamma) * epsilon));
  out.tau_max = (1.0 - hp.gamma) * epsilon / (2.0 * std::log(static_cast<double>(hp.n_actions)));
  out.delta_ok = hp.delta <= out.delta_max;
  out.h_ok = static_cast<double>(hp.horizon) >= out.h_min;
  out.tau_ok = hp.tau <= out.tau_max;
  return out;
}

std::vector<std::size_t> TempoFeasibility::candidates() const {
  std::vector<std::size_t> out;
  if (empty) return out;
  for (std::size_t n = n_min; n <= n_max; ++n) out.push_back(n);
  return out;
}

TempoClosedForm tempo_closed_form(double alpha_max, double eta_tau, double k_env, double k_agent,
                                  double total_wall_clock) {
  if (!(eta_tau > 0.0 && eta_tau < 1.0)) {
    throw std::invalid_argument("tempo_closed_form: eta*tau must lie in (0,1)");
  }
  TempoClosedForm out;
  if (alpha_max == 0.0) {
    out.case_id = "case1";
    out.candidates.push_back(total_wall_clock);
    return out;
  }
  if (!(k_env > 0.0 && k_agent > 0.0)) {
    throw std::invalid_argument("tempo_closed_form: k_env and k_agent must be > 0");
  }
  const double base = 1.0 - eta_tau;
  if (alpha_max == 1.0) {
    out.case_id = "case2";
    const double value = std::log(k_env / k_agent) / std::log(base) + 1.0;
    out.candidates.push_back(std::max(1.0, value));
    return out;
  }
  out.case_id = "case3";
  const double x = -std::log(base) / (alpha_max - 1.0);
  if (alpha_max > 1.0) {
    // x > 0: W0 gives exp(-W0(x)) < 1, so one iteration is enough.
    out.one_iteration_flag = true;
    out.candidates.push_back(1.0);
    return out;
  }
  // 0 < alpha < 1: x < 0, both branches admit solutions above the branch cut.
  if (x < -kInvE - 1e-15) {
    throw std::domain_error("tempo_closed_form: Lambert argument below -1/e");
  }
  for (LambertBranch branch : {LambertBranch::kPrincipal, LambertBranch::kLower}) {
    const double value = std::exp(-lambert_w(x, branch));
    if (value >= 1.0) out.candidates.push_back(value);
  }
  if (out.candidates.empty()) {
    out.one_iteration_flag = true;
    out.candidates.push_back(1.0);
  }
  return out;
}

std::size_t tempo_numeric(const std::function<double(std::size_t)>& bound_fn,
                          const std::vector<std::size_t>& candidates) {
  if (candidates.empty()) throw std::invalid_argument("tempo_numeric: empty candidate set");
  std::size_t best = candidates.front();
  double best_value = std::numeric_limits<double>::infinity();
  for (std::size_t n : candidates) {
    const double value = bound_fn(n);
    if (!std::isfinite(value)) {
      throw std::runtime_error("tempo_numeric: bound not finite at candidate " +
                               std::to_string(n));
    }
    if (value < best_value || (value == best_value && n < best)) {
      best_value = value;
      best = n;
    }
  }
  return best;
}

TempoPlan make_plan(double total_wall_clock, std::size_t delta_pi_star, double t1) {
  if (delta_pi_star < 1) throw std::invalid_argument("make_plan: delta_pi must be >= 1");
  if (!(t1 >= 0.0 && t1 < total_wall_clock)) {
    throw std::invalid_argument("make_plan: t1 must lie in [0, T)");
  }
  if (static_cast<double>(delta_pi_star) > total_wall_clock) {
    throw std::invalid_argument("make_plan: delta_pi exceeds wall-clock horizon (K* = 0)");
  }
  TempoPlan plan;
  plan.delta_pi_star = delta_pi_star;
  plan.k_star =
      static_cast<std::size_t>(std::floor(total_wall_clock / static_cast<double>(delta_pi_star)));
  for (std::size_t k = 1;; ++k) {
    const double t = t1 + static_cast<double>(delta_pi_star) * static_cast<double>(k - 1);
    if (t > total_wall_clock) break;
    plan.times.push_back(t);
  }
  return plan;
}

}  // namespace prost
