#pragma once

#include <cstdint>
#include <vector>

#include "prost/matrix.hpp"

namespace prost {

struct Step {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
};

using Trajectory = std::vector<Step>;

// Cumulative visitation counts and reward sums, kept sparse per episode.
// Invariants: per episode, sum_{s'} n(s',s,a) = n(s,a) for every (s,a) and
// sum_{s,a} n(s,a) = H.
class VisitStats {
 public:
  struct SaRecord {
    std::size_t state = 0;
    std::size_t action = 0;
    std::uint32_t count = 0;
    double reward_sum = 0.0;
    double reward_sq_sum = 0.0;
  };
  struct TransitionRecord {
    std::size_t state = 0;
    std::size_t action = 0;
    std::size_t next_state = 0;
    std::uint32_t count = 0;
  };
  struct EpisodeRecord {
    std::vector<SaRecord> sa;            // sorted by (state, action)
    std::vector<TransitionRecord> trans; // sorted by (state, action, next)
  };

  VisitStats(std::size_t n_states, std::size_t n_actions, std::size_t horizon)
      : n_states_(n_states), n_actions_(n_actions), horizon_(horizon) {}

  // Appends one episode worth of counts. Throws on out-of-range indices or a
  // trajectory whose length differs from H.
  void record_trajectory(const Trajectory& traj);

  std::size_t episodes_recorded() const { return episodes_.size(); }
  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  std::size_t horizon() const { return horizon_; }
  const EpisodeRecord& episode(std::size_t index) const { return episodes_[index]; }

  // Dense accumulation over episodes [first, last] (0-based, inclusive) with
  // per-episode weights; weights.size() must cover the range or be empty for
  // unweighted sums.
  struct WindowSums {
    Matrix count;        // sum_t n_t(s,a)
    Matrix reward_sum;   // sum_t S_t(s,a)
    Tensor3 trans_count; // sum_t n_t(s',s,a), laid out (s,a,s')
  };
  WindowSums window_sums(std::size_t first, std::size_t last) const;

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  std::size_t horizon_;
  std::vector<EpisodeRecord> episodes_;
};

}  // namespace prost
