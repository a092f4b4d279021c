#pragma once

#include "distill/dataset.hpp"

namespace bg::distill {

struct CurationDecision {
  uint64_t episode_id = 0;
  bool kept = false;
  std::string rejected_by;  // "", "sustain" or "force"
};

//! True iff some window of >= sustain_steps consecutive steps has
//! r_t strictly above the threshold.
bool sustained_task_reward(const DemoEpisode& episode, const CurationCriteria& criteria);

//! Plain sum of the per-step uniaxial readings over all steps and sensors.
double cumulative_force(const DemoEpisode& episode);

//! Keeps episodes meeting both criteria; decisions list one entry per input
//! episode with the first failing criterion named.
std::pair<DemoDataset, std::vector<CurationDecision>> curate(const DemoDataset& raw,
                                                             const CurationCriteria& criteria);

}  // namespace bg::distill
