#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "env/environment.hpp"

namespace bg::env {

//! Batched policy: maps a row-major observation matrix to one 9-dim action
//! row per environment. Implementations may consume the per-env RNG streams
//! (stochastic policies) or ignore them.
class BatchPolicy {
 public:
  virtual ~BatchPolicy() = default;
  virtual int obs_dim() const = 0;
  //! Whether the policy consumes privileged (true) or partial observations.
  virtual bool wants_privileged() const = 0;
  //! actions_out must be resized by the callee to n_envs * 9.
  virtual void act(const std::vector<double>& obs, int n_envs,
                   std::vector<RngStream>& action_rngs, std::vector<double>& actions_out) = 0;
};

//! One recorded environment transition.
struct Transition {
  int env_index = 0;
  uint64_t episode_seed = 0;
  std::array<double, 9> action{};
  reward::RewardBreakdown reward;
  EpisodeStatus status;
};

//! Creates n environments with objects distributed over object_ids as evenly
//! as possible (env i gets object_ids[i % k]; the remainder wraps round-robin).
std::vector<std::unique_ptr<Environment>> make_env_batch(const EnvConfig& base,
                                                         const std::vector<std::string>& object_ids,
                                                         int n_envs, uint64_t seed);

//! Steps all environments synchronously for `steps` control ticks,
//! auto-resetting terminated episodes. Transition order is (step, env) and is
//! independent of worker_threads. Throws std::runtime_error when the policy
//! returns a wrong-sized action matrix.
std::vector<Transition> run_batch(std::vector<std::unique_ptr<Environment>>& envs,
                                  BatchPolicy& policy, int steps, uint64_t action_seed,
                                  int worker_threads = 1);

//! Shared helper: steps each env with its action row, in parallel when
//! worker_threads > 1. Results are deterministic regardless of thread count.
void step_envs_parallel(std::vector<std::unique_ptr<Environment>>& envs,
                        const std::vector<double>& actions, std::vector<StepResult>& results,
                        int worker_threads);

}  // namespace bg::env
