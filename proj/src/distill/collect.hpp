#pragma once

#include "distill/curate.hpp"
#include "ppo/ppo.hpp"

namespace bg::distill {

struct CollectOptions {
  int target_count = 2000;        // retained episodes to gather
  int max_episodes = 200000;      // safety budget on attempts
  bool stochastic_teacher = true; // sample actions vs use the mean
  bool retain_all = false;        // keep every episode (uncurated ablation)
  int batch_envs = 64;
  uint64_t seed = 0;
  int worker_threads = 1;
};

//! Rolls out the teacher in demo mode (5 s horizon, disturbances off) over
//! the object set, logging the deployable observation, the applied action
//! (normalized), per-step task reward and the uniaxial force triplet.
//! Episodes that never meet the curation criteria are not retained unless
//! retain_all is set. Throws when the teacher checkpoint/env observation
//! dimensions do not match.
DemoDataset collect_demos(const ppo::PolicyCheckpoint& teacher, const env::EnvConfig& base_env,
                          const std::vector<std::string>& objects,
                          const CurationCriteria& criteria, const CollectOptions& options);

}  // namespace bg::distill
