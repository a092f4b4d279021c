#include "distill/curate.hpp"

namespace bg::distill {

bool sustained_task_reward(const DemoEpisode& episode, const CurationCriteria& criteria) {
  const int needed = criteria.sustain_steps();
  int run = 0;
  for (int t = 0; t < episode.length; ++t) {
    if (episode.task_reward[t] > criteria.task_reward_threshold) {
      if (++run >= needed) return true;
    } else {
      run = 0;
    }
  }
  return false;
}

double cumulative_force(const DemoEpisode& episode) {
  double sum = 0;
  for (int t = 0; t < episode.length; ++t) {
    for (int f = 0; f < 3; ++f) sum += episode.forces[t * 3 + f];
  }
  return sum;
}

std::pair<DemoDataset, std::vector<CurationDecision>> curate(const DemoDataset& raw,
                                                             const CurationCriteria& criteria) {
  criteria.validate();
  DemoDataset kept;
  kept.criteria = criteria;
  kept.seeds = raw.seeds;
  std::vector<CurationDecision> decisions;
  decisions.reserve(raw.episodes.size());
  for (const auto& e : raw.episodes) {
    CurationDecision d;
    d.episode_id = e.episode_id;
    if (!sustained_task_reward(e, criteria)) {
      d.rejected_by = "sustain";
    } else if (cumulative_force(e) <= criteria.force_sum_threshold) {
      d.rejected_by = "force";
    } else {
      d.kept = true;
      kept.episodes.push_back(e);
    }
    decisions.push_back(std::move(d));
  }
  return {std::move(kept), std::move(decisions)};
}

}  // namespace bg::distill
