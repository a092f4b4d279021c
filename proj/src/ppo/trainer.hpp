#pragma once

#include <functional>
#include <string>

#include "ppo/rollout.hpp"

namespace bg::ppo {

struct TrainLogRow {
  int iteration = 0;
  double return_mean = 0;
  double return_std = 0;
  double kl = 0;
  double lr = 0;
  double clip_fraction = 0;
  double success_proxy = 0;  // fraction of finished episodes with a sustained lift
  double entropy = 0;
  double wall_seconds = 0;
};

struct TeacherTrainConfig {
  PPOConfig ppo;
  env::EnvConfig env;
  std::vector<std::string> objects;    // distributed round-robin over envs
  std::vector<int> hidden{512, 256, 128};
  bool partial_obs = false;            // "RL w/ partial observation" baseline
  uint64_t seed = 0;
  std::string out_dir;                 // checkpoints + CSV log; empty = no files
  int checkpoint_every = 0;            // 0 = only final
  int worker_threads = 1;
};

//! PPO training session; owns envs, networks, optimizer, normalizer. Split
//! from a free function so sessions can snapshot/resume and tests can step
//! them iteration by iteration.
class TeacherTrainer {
 public:
  explicit TeacherTrainer(const TeacherTrainConfig& cfg);

  //! One collect / GAE / update cycle.
  TrainLogRow iterate();

  //! Runs until max_iterations; appends CSV rows; saves checkpoints.
  //! Returns the final policy.
  PolicyCheckpoint run(const std::function<void(const TrainLogRow&)>& on_log = nullptr);

  PolicyCheckpoint snapshot_policy() const;

  //! Full-session state: parameters, optimizer moments, normalizer,
  //! learning rate, iteration count, env worlds and RNG streams.
  void save_session(const std::string& path) const;
  void load_session(const std::string& path);

  int iteration() const { return iteration_; }
  const ActorCritic& actor_critic() const { return ac_; }
  const RunningNormalizer& normalizer() const { return norm_; }

 private:
  TeacherTrainConfig cfg_;
  std::vector<std::unique_ptr<env::Environment>> envs_;
  ActorCritic ac_;
  RunningNormalizer norm_;
  nn::AdamState<float> opt_;
  std::vector<RngStream> action_rngs_;
  RngStream shuffle_rng_;
  EpisodeTracker tracker_;
  RolloutBuffer buffer_;
  double lr_;
  int iteration_ = 0;
};

}  // namespace bg::ppo
