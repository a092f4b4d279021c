#include "distill/collect.hpp"

#include "env/observation.hpp"

namespace bg::distill {

DemoDataset collect_demos(const ppo::PolicyCheckpoint& teacher, const env::EnvConfig& base_env,
                          const std::vector<std::string>& objects,
                          const CurationCriteria& criteria, const CollectOptions& options) {
  criteria.validate();
  if (!teacher.privileged || teacher.ac.obs_dim != env::privileged_dim()) {
    throw std::runtime_error("collect_demos: teacher checkpoint observation dim " +
                             std::to_string(teacher.ac.obs_dim) + " does not match privileged " +
                             std::to_string(env::privileged_dim()));
  }

  env::EnvConfig demo_env = base_env;
  demo_env.demo_mode = true;
  demo_env.horizon = std::min(base_env.horizon, criteria.episode_horizon);

  auto envs = env::make_env_batch(demo_env, objects, options.batch_envs,
                                  RngStream::mix_seed(options.seed, 0x64656d6f));
  std::vector<RngStream> action_rngs;
  for (int i = 0; i < options.batch_envs; ++i) {
    action_rngs.emplace_back(RngStream::mix_seed(RngStream::mix_seed(options.seed, 0x616374), i));
  }

  const int n = options.batch_envs;
  std::vector<DemoEpisode> open(n);
  for (int i = 0; i < n; ++i) {
    open[i].object_id = envs[i]->config().object_id;
    open[i].draw = envs[i]->draw();
  }

  DemoDataset out;
  out.criteria = criteria;
  out.seeds = {options.seed};

  ppo::GaussianActorPolicy policy(&teacher.ac, &teacher.norm, true,
                                  options.stochastic_teacher);
  std::vector<double> priv_obs(static_cast<size_t>(n) * env::privileged_dim());
  std::vector<double> actions;
  std::vector<env::StepResult> results;
  uint64_t episode_counter = 0;
  int attempts = 0;

  while (static_cast<int>(out.episodes.size()) < options.target_count &&
         attempts < options.max_episodes) {
    for (int i = 0; i < n; ++i) {
      const auto po = envs[i]->privileged_obs();
      std::copy(po.begin(), po.end(), priv_obs.begin() + static_cast<size_t>(i) * po.size());
      const auto so = envs[i]->partial_obs();
      for (double v : so) open[i].obs.push_back(static_cast<float>(v));
    }
    actions.clear();
    policy.act(priv_obs, n, action_rngs, actions);

    env::step_envs_parallel(envs, actions, results, options.worker_threads);

    for (int i = 0; i < n; ++i) {
      std::array<double, 9> applied{};
      for (int j = 0; j < 9; ++j) {
        applied[j] = std::clamp(actions[i * 9 + j], -kActionBound, kActionBound);
      }
      const auto normalized = normalize_action(applied);
      for (float v : normalized) open[i].action.push_back(v);
      open[i].task_reward.push_back(static_cast<float>(results[i].reward.task));
      const auto uni = sim::uniaxial_forces(envs[i]->world(), envs[i]->model(),
                                            envs[i]->physics().uniaxial_threshold);
      for (double u : uni) open[i].forces.push_back(static_cast<float>(u));
      open[i].length += 1;

      if (results[i].status.terminated) {
        attempts += 1;
        DemoEpisode& e = open[i];
        e.episode_id = episode_counter++;
        const bool keep =
            results[i].status.cause != env::TerminationCause::Invalid &&
            (options.retain_all ||
             (sustained_task_reward(e, criteria) &&
              cumulative_force(e) > criteria.force_sum_threshold));
        if (keep && static_cast<int>(out.episodes.size()) < options.target_count) {
          out.episodes.push_back(std::move(e));
        }
        envs[i]->reset();
        open[i] = DemoEpisode{};
        open[i].object_id = envs[i]->config().object_id;
        open[i].draw = envs[i]->draw();
      }
    }
  }
  return out;
}

}  // namespace bg::distill
