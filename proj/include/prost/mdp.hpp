#pragma once

#include <cstddef>

#include "prost/matrix.hpp"

namespace prost {

enum class StochasticityClass { kExact, kSubStochastic };

// One tabular MDP <S, A, H, P, R, gamma> frozen at a wall-clock time.
//
// Exact snapshots have transition rows that sum to 1; forecasted models are
// sub-stochastic (rows sum to n/(lambda+n) <= 1) and are marked as such.
struct MdpSnapshot {
  std::size_t n_states = 0;
  std::size_t n_actions = 0;
  std::size_t horizon = 0;
  double gamma = 0.0;
  Tensor3 transition;  // (s, a, s')
  Matrix reward;       // (s, a)
  StochasticityClass stochasticity_class = StochasticityClass::kExact;

  // Throws std::invalid_argument when a row-sum, range, or finiteness
  // invariant is violated.
  void validate() const;

  double max_abs_reward() const;
};

}  // namespace prost
