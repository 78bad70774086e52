#include "prost/mdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace prost {

namespace {
constexpr double kRowSumTol = 1e-12;
}

void MdpSnapshot::validate() const {
  if (n_states == 0 || n_actions == 0 || horizon == 0) {
    throw std::invalid_argument("MdpSnapshot: empty state/action space or horizon");
  }
  if (!(gamma > 0.0 && gamma < 1.0)) {
    throw std::invalid_argument("MdpSnapshot: gamma must lie in (0,1)");
  }
  if (transition.dim0() != n_states || transition.dim1() != n_actions ||
      transition.dim2() != n_states || reward.rows() != n_states ||
      reward.cols() != n_actions) {
    throw std::invalid_argument("MdpSnapshot: tensor shape mismatch");
  }
  for (std::size_t s = 0; s < n_states; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      double row_sum = 0.0;
      for (std::size_t sp = 0; sp < n_states; ++sp) {
        const double p = transition(s, a, sp);
        if (!(p >= 0.0 && p <= 1.0 + kRowSumTol)) {
          throw std::invalid_argument("MdpSnapshot: transition entry outside [0,1] at (" +
                                      std::to_string(s) + "," + std::to_string(a) + ")");
        }
        row_sum += p;
      }
      if (stochasticity_class == StochasticityClass::kExact) {
        if (std::abs(row_sum - 1.0) > kRowSumTol) {
          throw std::invalid_argument("MdpSnapshot: exact row (" + std::to_string(s) + "," +
                                      std::to_string(a) + ") sums to " + std::to_string(row_sum));
        }
      } else if (row_sum > 1.0 + kRowSumTol) {
        throw std::invalid_argument("MdpSnapshot: sub-stochastic row sum exceeds 1");
      }
      if (!std::isfinite(reward(s, a))) {
        throw std::invalid_argument("MdpSnapshot: non-finite reward");
      }
    }
  }
}

double MdpSnapshot::max_abs_reward() const {
  double m = 0.0;
  for (double r : reward.data()) m = std::max(m, std::abs(r));
  return m;
}

}  // namespace prost
