#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace prost {

enum class LambertBranch { kPrincipal, kLower };

// W satisfying W e^W = x, to residual |W e^W - x| <= 1e-12, by damped Halley
// iteration from branch-appropriate seeds. Principal branch needs x >= -1/e;
// the lower branch needs -1/e <= x < 0.
double lambert_w(double x, LambertBranch branch);

// Validated hyperparameter bundle shared by the tempo and bound calculators.
struct HyperParams {
  double eta = 0.1;
  double tau = 0.1;
  double gamma = 0.9;
  double lambda = 1.0;
  double beta = 1.0;
  double delta = 0.0;       // policy-evaluation inexactness bound
  double epsilon = 1.0;     // optimization-error threshold
  double confidence = 0.1;  // p
  std::size_t horizon = 5;
  double total_wall_clock = 0.0;  // T
  double r_max = 1.0;
  double r_tilde_max = 1.0;
  std::size_t n_actions = 2;
  std::size_t n_states = 2;
  // Cap on ||log pi* - log pi0||_inf used by the worst-case C1 when the
  // initial policy is unknown at planning time.
  double theta_log_cap = 6.907755278982137;  // log(1e3)

  double r_hat_max() const;   // r_tilde_max + 2 beta / sqrt(lambda)
  double c1_worst_case() const;
  double c2() const;          // (2 delta / (1-gamma)) (1 + gamma/(eta tau))
  void validate() const;
};

// Feasible tempo sets N_II (optimization side) and N_I (forecaster side),
// with the hyperparameter conditions required for the epsilon threshold.
struct TempoFeasibility {
  std::size_t n_min = 1;        // smallest admissible tempo (N_II lower bound)
  std::size_t n_max = 0;        // K - 1 (N_I upper bound)
  bool empty = false;           // n_min > n_max
  double delta_max = 0.0;       // eval-noise bound delta must not exceed this
  double h_min = 0.0;           // horizon must be at least this
  double tau_max = 0.0;         // entropy coefficient must not exceed this
  bool delta_ok = false;
  bool h_ok = false;
  bool tau_ok = false;

  std::vector<std::size_t> candidates() const;  // n_min..n_max
};

TempoFeasibility feasible_tempo_set(const HyperParams& hp, double epsilon, std::size_t k_total,
                                    double c1);

// Closed-form suboptimal tempo of the drifting-constant cases. case1
// (alpha = 0): delta_pi = T. case2 (alpha = 1): log_{1-eta tau}(k_env/k_agent) + 1.
// case3 (otherwise): exp(-W(-log(1-eta tau)/(alpha-1))); for alpha < 1 both
// Lambert branches yield candidates, for alpha > 1 the value drops below one
// and a single iteration suffices.
struct TempoClosedForm {
  std::string case_id;                  // "case1" | "case2" | "case3"
  std::vector<double> candidates;      // real-valued delta_pi candidates, >= 1
  bool one_iteration_flag = false;     // case3 with alpha > 1
};

TempoClosedForm tempo_closed_form(double alpha_max, double eta_tau, double k_env, double k_agent,
                                  double total_wall_clock);

// Exhaustive integer argmin of the bound over the candidate set; ties break
// to the smallest tempo. Throws on an empty candidate set or a non-finite
// bound value.
std::size_t tempo_numeric(const std::function<double(std::size_t)>& bound_fn,
                          const std::vector<std::size_t>& candidates);

// Interaction-time plan t_k = t1 + delta_pi (k-1). k_star = floor(T/delta_pi);
// times are generated while t_k <= T, which can retain one extra interaction
// (both counts are recorded).
struct TempoPlan {
  std::size_t delta_pi_star = 1;
  std::size_t k_star = 0;
  std::vector<double> times;
  std::string case_id = "numeric";
  double k_env = 0.0;
  double k_agent = 0.0;
  double bound_at_star = 0.0;
};

TempoPlan make_plan(double total_wall_clock, std::size_t delta_pi_star, double t1);

}  // namespace prost
