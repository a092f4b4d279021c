#pragma once

#include <functional>
#include <string>
#include <vector>

#include "env/batch.hpp"

namespace bg::eval {

//! Seeded grasp-evaluation protocol: a trial succeeds when the object is
//! lifted (center at or above the target height with no ground contact) and
//! held continuously for hold_seconds within the episode.
struct EvalProtocol {
  int trials_per_object = 10;
  double episode_duration = 10.0;  // s
  double hold_seconds = 1.0;
  uint64_t seed_base = 0;
  bool noise_enabled = true;
  bool disturbance_enabled = false;

  int hold_ticks(double control_dt = 0.05) const {
    return static_cast<int>(std::lround(hold_seconds / control_dt));
  }
};

struct TrialResult {
  std::string object_id;
  uint64_t seed = 0;
  bool success = false;
  double time_to_grasp = -1.0;  // s until the hold completed; -1 on failure
  double peak_force = 0.0;      // max uniaxial reading over the episode, N
};

struct ObjectRate {
  std::string object_id;
  int trials = 0;
  int successes = 0;
  double rate() const { return trials > 0 ? static_cast<double>(successes) / trials : 0.0; }
};

struct Report {
  std::string policy_name;
  EvalProtocol protocol;
  std::vector<TrialResult> trials;

  std::vector<ObjectRate> per_object() const;
  double overall_rate() const;
};

//! A batch policy plus the per-episode state reset it needs (e.g. clearing a
//! transformer observation history).
struct EvalPolicy {
  env::BatchPolicy* policy = nullptr;
  std::function<void()> on_episode_start;
  std::string name;
};

//! Runs trials_per_object seeded episodes per object; deterministic given
//! (policy, protocol, seeds).
Report evaluate(const EvalPolicy& policy, const env::EnvConfig& base_env,
                const std::vector<std::string>& objects, const EvalProtocol& protocol);

}  // namespace bg::eval
