#include "env/batch.hpp"

#include <stdexcept>
#include <thread>

namespace bg::env {

std::vector<std::unique_ptr<Environment>> make_env_batch(const EnvConfig& base,
                                                         const std::vector<std::string>& object_ids,
                                                         int n_envs, uint64_t seed) {
  if (object_ids.empty()) throw std::invalid_argument("make_env_batch: no object ids");
  std::vector<std::unique_ptr<Environment>> envs;
  envs.reserve(n_envs);
  for (int i = 0; i < n_envs; ++i) {
    EnvConfig cfg = base;
    cfg.object_id = object_ids[i % object_ids.size()];
    envs.push_back(std::make_unique<Environment>(cfg, RngStream::mix_seed(seed, i)));
  }
  return envs;
}

void step_envs_parallel(std::vector<std::unique_ptr<Environment>>& envs,
                        const std::vector<double>& actions, std::vector<StepResult>& results,
                        int worker_threads) {
  const int n = static_cast<int>(envs.size());
  results.resize(n);
  const auto work = [&](int begin, int end) {
    for (int i = begin; i < end; ++i) {
      Action a;
      for (int j = 0; j < 9; ++j) a.delta_theta[j] = actions[i * 9 + j];
      results[i] = envs[i]->step(a);
    }
  };
  if (worker_threads <= 1 || n < 2) {
    work(0, n);
    return;
  }
  const int k = std::min(worker_threads, n);
  std::vector<std::thread> pool;
  pool.reserve(k);
  for (int t = 0; t < k; ++t) {
    const int begin = n * t / k;
    const int end = n * (t + 1) / k;
    pool.emplace_back(work, begin, end);
  }
  for (auto& th : pool) th.join();
}

std::vector<Transition> run_batch(std::vector<std::unique_ptr<Environment>>& envs,
                                  BatchPolicy& policy, int steps, uint64_t action_seed,
                                  int worker_threads) {
  const int n = static_cast<int>(envs.size());
  const int obs_dim = policy.obs_dim();
  std::vector<RngStream> action_rngs;
  action_rngs.reserve(n);
  for (int i = 0; i < n; ++i) action_rngs.emplace_back(RngStream::mix_seed(action_seed, i));

  std::vector<Transition> transitions;
  transitions.reserve(static_cast<size_t>(n) * steps);
  std::vector<double> obs(static_cast<size_t>(n) * obs_dim);
  std::vector<double> actions;
  std::vector<StepResult> results;

  for (int s = 0; s < steps; ++s) {
    for (int i = 0; i < n; ++i) {
      const auto o = policy.wants_privileged() ? envs[i]->privileged_obs() : envs[i]->partial_obs();
      if (static_cast<int>(o.size()) != obs_dim) {
        throw std::runtime_error("run_batch: observation dim mismatch");
      }
      std::copy(o.begin(), o.end(), obs.begin() + static_cast<size_t>(i) * obs_dim);
    }
    actions.clear();
    policy.act(obs, n, action_rngs, actions);
    if (static_cast<int>(actions.size()) != n * 9) {
      throw std::runtime_error("run_batch: policy returned wrong action dimension (" +
                               std::to_string(actions.size()) + " values for " +
                               std::to_string(n) + " envs)");
    }
    step_envs_parallel(envs, actions, results, worker_threads);
    for (int i = 0; i < n; ++i) {
      Transition t;
      t.env_index = i;
      t.episode_seed = envs[i]->episode_seed();
      for (int j = 0; j < 9; ++j) t.action[j] = actions[i * 9 + j];
      t.reward = results[i].reward;
      t.status = results[i].status;
      transitions.push_back(t);
      if (results[i].status.terminated) envs[i]->reset();
    }
  }
  return transitions;
}

}  // namespace bg::env
