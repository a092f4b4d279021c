#include "ppo/ppo.hpp"

namespace bg::ppo {

void RolloutBuffer::resize(int steps_, int envs_, int obs_dim_) {
  steps = steps_;
  envs = envs_;
  obs_dim = obs_dim_;
  const int64_t n = size();
  obs.assign(n * obs_dim, 0.f);
  action.assign(n * ActorCritic::kActDim, 0.f);
  mean.assign(n * ActorCritic::kActDim, 0.f);
  stddev.assign(n * ActorCritic::kActDim, 0.f);
  logp.assign(n, 0.f);
  value.assign(n, 0.f);
  reward.assign(n, 0.f);
  done.assign(n, 0);
  timeout.assign(n, 0);
  bootstrap_value.assign(n, 0.f);
  valid.assign(n, 1);
  advantage.assign(n, 0.f);
  returns.assign(n, 0.f);
}

void compute_gae(RolloutBuffer& b, double gamma, double lam) {
  for (int n = 0; n < b.envs; ++n) {
    double acc = 0.0;
    for (int t = b.steps - 1; t >= 0; --t) {
      const int64_t i = b.idx(t, n);
      double next_value;
      if (b.done[i]) {
        next_value = b.timeout[i] ? b.bootstrap_value[i] : 0.0;
      } else if (t == b.steps - 1) {
        next_value = b.bootstrap_value[i];  // buffer boundary mid-episode
      } else {
        next_value = b.value[b.idx(t + 1, n)];
      }
      const double delta = b.reward[i] + gamma * next_value - b.value[i];
      acc = delta + gamma * lam * (b.done[i] ? 0.0 : acc);
      if (!b.valid[i]) acc = 0.0;
      b.advantage[i] = static_cast<float>(acc);
      b.returns[i] = static_cast<float>(acc + b.value[i]);
    }
  }
}

void normalize_advantages(RolloutBuffer& b) {
  double sum = 0, count = 0;
  for (int64_t i = 0; i < b.size(); ++i) {
    if (!b.valid[i]) continue;
    sum += b.advantage[i];
    count += 1;
  }
  if (count < 2) return;
  const double mean = sum / count;
  double var = 0;
  for (int64_t i = 0; i < b.size(); ++i) {
    if (!b.valid[i]) continue;
    const double d = b.advantage[i] - mean;
    var += d * d;
  }
  const double stddev = std::sqrt(var / count) + 1e-8;
  for (int64_t i = 0; i < b.size(); ++i) {
    b.advantage[i] = b.valid[i] ? static_cast<float>((b.advantage[i] - mean) / stddev) : 0.f;
  }
}

double adapt_lr(double kl_measured, double desired_kl, double lr, double lr_min, double lr_max) {
  if (kl_measured > 2.0 * desired_kl) {
    lr /= 1.5;
  } else if (kl_measured < 0.5 * desired_kl && kl_measured >= 0.0) {
    lr *= 1.5;
  }
  return std::clamp(lr, lr_min, lr_max);
}

}  // namespace bg::ppo
