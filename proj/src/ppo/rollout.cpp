#include "ppo/rollout.hpp"

namespace bg::ppo {

void collect_rollouts(std::vector<std::unique_ptr<env::Environment>>& envs, ActorCritic& ac,
                      RunningNormalizer& norm, const PPOConfig& cfg, bool privileged,
                      std::vector<RngStream>& action_rngs, RolloutBuffer& buffer,
                      EpisodeTracker& tracker, int worker_threads) {
  const int n = static_cast<int>(envs.size());
  const int d = ac.obs_dim;
  const int a_dim = ActorCritic::kActDim;
  buffer.resize(cfg.steps_per_env, n, d);
  tracker.finished_returns.clear();
  tracker.finished_count = 0;
  tracker.finished_success = 0;

  std::vector<double> raw_obs(static_cast<size_t>(n) * d);
  std::vector<float> norm_obs(static_cast<size_t>(n) * d);
  std::vector<float> mean(static_cast<size_t>(n) * a_dim);
  std::vector<float> values(n);
  std::vector<double> actions(static_cast<size_t>(n) * a_dim);
  std::vector<env::StepResult> results;
  std::vector<float> one_obs(d);
  std::vector<float> one_mean(a_dim);

  const auto fetch_obs = [&](int i, double* out) {
    const auto o = privileged ? envs[i]->privileged_obs() : envs[i]->partial_obs();
    std::copy(o.begin(), o.end(), out);
  };

  const auto& log_std = ac.params.value("log_std").data;

  for (int t = 0; t < cfg.steps_per_env; ++t) {
    for (int i = 0; i < n; ++i) fetch_obs(i, raw_obs.data() + static_cast<size_t>(i) * d);
    norm.update(raw_obs.data(), n);
    norm.normalize(raw_obs.data(), norm_obs.data(), n);
    ac.mean_value(norm_obs.data(), n, mean.data(), values.data());

    for (int i = 0; i < n; ++i) {
      const int64_t idx = buffer.idx(t, i);
      std::copy_n(&norm_obs[static_cast<size_t>(i) * d], d, &buffer.obs[idx * d]);
      buffer.value[idx] = values[i];
      double logp = -0.5 * a_dim * nn::kLn2Pi;
      for (int j = 0; j < a_dim; ++j) {
        const double sd = std::exp(static_cast<double>(log_std[j]));
        const double eps = action_rngs[i].normal();
        const double sample = mean[i * a_dim + j] + sd * eps;
        actions[i * a_dim + j] = sample;
        buffer.action[idx * a_dim + j] = static_cast<float>(sample);
        buffer.mean[idx * a_dim + j] = mean[i * a_dim + j];
        buffer.stddev[idx * a_dim + j] = static_cast<float>(sd);
        logp += -0.5 * eps * eps - static_cast<double>(log_std[j]);
      }
      buffer.logp[idx] = static_cast<float>(logp);
    }

    env::step_envs_parallel(envs, actions, results, worker_threads);

    for (int i = 0; i < n; ++i) {
      const int64_t idx = buffer.idx(t, i);
      const auto& res = results[i];
      buffer.reward[idx] = static_cast<float>(res.reward.total);
      tracker.episode_return[i] += res.reward.total;
      if (envs[i]->lifted_streak() >= 20) tracker.episode_success[i] = 1;

      if (res.status.terminated) {
        buffer.done[idx] = 1;
        if (res.status.cause == env::TerminationCause::Invalid) {
          buffer.valid[idx] = 0;
        } else if (res.status.cause == env::TerminationCause::Timeout) {
          buffer.timeout[idx] = 1;
          fetch_obs(i, raw_obs.data());  // post-step observation of this env
          norm.normalize(raw_obs.data(), one_obs.data(), 1);
          float v = 0;
          ac.mean_value(one_obs.data(), 1, one_mean.data(), &v);
          buffer.bootstrap_value[idx] = v;
        }
        tracker.finished_count += 1;
        tracker.finished_success += tracker.episode_success[i];
        tracker.finished_returns.push_back(tracker.episode_return[i]);
        tracker.episode_return[i] = 0.0;
        tracker.episode_success[i] = 0;
        envs[i]->reset();
      } else if (t == cfg.steps_per_env - 1) {
        fetch_obs(i, raw_obs.data());
        norm.normalize(raw_obs.data(), one_obs.data(), 1);
        float v = 0;
        ac.mean_value(one_obs.data(), 1, one_mean.data(), &v);
        buffer.bootstrap_value[idx] = v;
      }
    }
  }
}

}  // namespace bg::ppo
