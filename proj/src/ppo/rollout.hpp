#pragma once

#include <memory>

#include "ppo/ppo.hpp"

namespace bg::ppo {

//! Per-env episode bookkeeping that survives across rollout boundaries.
struct EpisodeTracker {
  std::vector<double> episode_return;   // running return of the open episode
  std::vector<uint8_t> episode_success; // sustained-lift achieved this episode

  // Completed-episode statistics gathered during the last collect call.
  std::vector<double> finished_returns;
  int finished_count = 0;
  int finished_success = 0;

  void reset(int n_envs) {
    episode_return.assign(n_envs, 0.0);
    episode_success.assign(n_envs, 0);
    finished_returns.clear();
    finished_count = 0;
    finished_success = 0;
  }
};

//! Collects exactly steps_per_env transitions from every environment,
//! sampling from the Gaussian policy, updating the observation normalizer,
//! auto-resetting finished episodes, and bootstrapping values at time limits
//! and at the buffer boundary. Fully deterministic given the RNG streams.
void collect_rollouts(std::vector<std::unique_ptr<env::Environment>>& envs, ActorCritic& ac,
                      RunningNormalizer& norm, const PPOConfig& cfg, bool privileged,
                      std::vector<RngStream>& action_rngs, RolloutBuffer& buffer,
                      EpisodeTracker& tracker, int worker_threads = 1);

}  // namespace bg::ppo
