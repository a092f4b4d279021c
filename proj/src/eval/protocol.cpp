#include "eval/protocol.hpp"

#include <algorithm>

namespace bg::eval {

std::vector<ObjectRate> Report::per_object() const {
  std::vector<ObjectRate> rates;
  for (const auto& t : trials) {
    auto it = std::find_if(rates.begin(), rates.end(),
                           [&](const ObjectRate& r) { return r.object_id == t.object_id; });
    if (it == rates.end()) {
      rates.push_back({t.object_id, 0, 0});
      it = rates.end() - 1;
    }
    it->trials += 1;
    it->successes += t.success ? 1 : 0;
  }
  return rates;
}

double Report::overall_rate() const {
  if (trials.empty()) return 0.0;
  int successes = 0;
  for (const auto& t : trials) successes += t.success ? 1 : 0;
  return static_cast<double>(successes) / trials.size();
}

Report evaluate(const EvalPolicy& policy, const env::EnvConfig& base_env,
                const std::vector<std::string>& objects, const EvalProtocol& protocol) {
  Report report;
  report.policy_name = policy.name;
  report.protocol = protocol;

  std::vector<RngStream> action_rngs;
  std::vector<double> actions;

  for (size_t obj_idx = 0; obj_idx < objects.size(); ++obj_idx) {
    env::EnvConfig cfg = base_env;
    cfg.object_id = objects[obj_idx];
    cfg.horizon = protocol.episode_duration;
    cfg.demo_mode = false;
    cfg.randomization.noise_enabled = protocol.noise_enabled;
    cfg.randomization.disturbance_enabled = protocol.disturbance_enabled;

    for (int trial = 0; trial < protocol.trials_per_object; ++trial) {
      const uint64_t trial_seed =
          RngStream::mix_seed(protocol.seed_base, obj_idx * 10007 + trial);
      TrialResult result;
      result.object_id = objects[obj_idx];
      result.seed = trial_seed;

      env::Environment env(cfg, trial_seed);
      if (policy.on_episode_start) policy.on_episode_start();
      action_rngs.clear();
      action_rngs.emplace_back(RngStream::mix_seed(trial_seed, 0x61637431));

      const int hold_needed = protocol.hold_ticks(env.control_dt());
      while (!env.status().terminated) {
        const auto obs = policy.policy->wants_privileged() ? env.privileged_obs()
                                                           : env.partial_obs();
        actions.clear();
        policy.policy->act(obs, 1, action_rngs, actions);
        env::Action a;
        for (int j = 0; j < 9; ++j) a.delta_theta[j] = actions[j];
        const auto res = env.step(a);

        const auto uni =
            sim::uniaxial_forces(env.world(), env.model(), env.physics().uniaxial_threshold);
        for (double u : uni) result.peak_force = std::max(result.peak_force, u);

        if (!result.success && env.lifted_streak() >= hold_needed) {
          result.success = true;
          result.time_to_grasp = res.status.elapsed;
        }
      }
      report.trials.push_back(result);
    }
  }
  return report;
}

}  // namespace bg::eval
