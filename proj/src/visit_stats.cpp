#include "prost/visit_stats.hpp"

#include <map>
#include <stdexcept>
#include <tuple>

namespace prost {

void VisitStats::record_trajectory(const Trajectory& traj) {
  if (traj.size() != horizon_) {
    throw std::invalid_argument("record_trajectory: trajectory length differs from horizon");
  }
  std::map<std::pair<std::size_t, std::size_t>, SaRecord> sa;
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::uint32_t> trans;
  for (const Step& step : traj) {
    if (step.state >= n_states_ || step.next_state >= n_states_ || step.action >= n_actions_) {
      throw std::out_of_range("record_trajectory: state/action index out of range");
    }
    SaRecord& rec = sa[{step.state, step.action}];
    rec.state = step.state;
    rec.action = step.action;
    rec.count += 1;
    rec.reward_sum += step.reward;
    rec.reward_sq_sum += step.reward * step.reward;
    trans[{step.state, step.action, step.next_state}] += 1;
  }
  EpisodeRecord episode;
  episode.sa.reserve(sa.size());
  for (const auto& [key, rec] : sa) episode.sa.push_back(rec);
  episode.trans.reserve(trans.size());
  for (const auto& [key, count] : trans) {
    episode.trans.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), count});
  }
  episodes_.push_back(std::move(episode));
}

VisitStats::WindowSums VisitStats::window_sums(std::size_t first, std::size_t last) const {
  if (last >= episodes_.size() || first > last) {
    throw std::out_of_range("window_sums: bad episode range");
  }
  WindowSums sums;
  sums.count = Matrix(n_states_, n_actions_, 0.0);
  sums.reward_sum = Matrix(n_states_, n_actions_, 0.0);
  sums.trans_count = Tensor3(n_states_, n_actions_, n_states_, 0.0);
  for (std::size_t t = first; t <= last; ++t) {
    for (const SaRecord& rec : episodes_[t].sa) {
      sums.count(rec.state, rec.action) += rec.count;
      sums.reward_sum(rec.state, rec.action) += rec.reward_sum;
    }
    for (const TransitionRecord& rec : episodes_[t].trans) {
      sums.trans_count(rec.state, rec.action, rec.next_state) += rec.count;
    }
  }
  return sums;
}

}  // namespace prost
