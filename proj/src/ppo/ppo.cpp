#include "ppo/ppo.hpp"

#include <numeric>
#include <stdexcept>

namespace bg::ppo {

void PPOConfig::validate() const {
  if (n_envs < 1 || steps_per_env < 1 || epochs < 1 || minibatches < 1) {
    throw std::invalid_argument("PPO config: counts must be positive");
  }
  const int64_t samples = static_cast<int64_t>(n_envs) * steps_per_env;
  if (samples % minibatches != 0) {
    throw std::invalid_argument("PPO config: minibatches must divide n_envs * steps_per_env");
  }
  if (clip_range <= 0 || gamma <= 0 || gamma > 1 || lam < 0 || lam > 1) {
    throw std::invalid_argument("PPO config: bad clip/gamma/lambda");
  }
  if (learning_rate <= 0 || lr_min <= 0 || lr_max < lr_min) {
    throw std::invalid_argument("PPO config: bad learning rate settings");
  }
}

ActorCritic ActorCritic::make(int obs_dim, const std::vector<int>& hidden, uint64_t seed,
                              double init_log_std) {
  ActorCritic ac;
  ac.obs_dim = obs_dim;
  ac.actor_spec = {obs_dim, hidden, kActDim, nn::Activation::Elu};
  ac.critic_spec = {obs_dim, hidden, 1, nn::Activation::Elu};
  RngStream rng(seed);
  nn::init_mlp(ac.params, "actor", ac.actor_spec, rng);
  nn::init_mlp(ac.params, "critic", ac.critic_spec, rng);
  ac.params.create_const("log_std", {kActDim}, static_cast<float>(init_log_std));
  return ac;
}

void ActorCritic::mean_value(const float* obs, int64_t n, float* mean_out,
                             float* value_out) const {
  nn::mlp_eval(params, "actor", actor_spec, obs, n, mean_out);
  if (value_out) nn::mlp_eval(params, "critic", critic_spec, obs, n, value_out);
}

namespace {

struct MinibatchData {
  std::vector<float> obs, action, logp, adv, ret, mask, mean_old, std_old;
};

void gather(const RolloutBuffer& buf, const std::vector<int64_t>& order, int64_t begin,
            int64_t end, MinibatchData& mb) {
  const int d = buf.obs_dim;
  const int a = ActorCritic::kActDim;
  const int64_t b = end - begin;
  mb.obs.resize(b * d);
  mb.action.resize(b * a);
  mb.logp.resize(b);
  mb.adv.resize(b);
  mb.ret.resize(b);
  mb.mask.resize(b);
  mb.mean_old.resize(b * a);
  mb.std_old.resize(b * a);
  for (int64_t k = 0; k < b; ++k) {
    const int64_t i = order[begin + k];
    std::copy_n(&buf.obs[i * d], d, &mb.obs[k * d]);
    std::copy_n(&buf.action[i * a], a, &mb.action[k * a]);
    std::copy_n(&buf.mean[i * a], a, &mb.mean_old[k * a]);
    std::copy_n(&buf.stddev[i * a], a, &mb.std_old[k * a]);
    mb.logp[k] = buf.logp[i];
    mb.adv[k] = buf.advantage[i];
    mb.ret[k] = buf.returns[i];
    mb.mask[k] = buf.valid[i] ? 1.f : 0.f;
  }
}

}  // namespace

UpdateMetrics ppo_update(ActorCritic& ac, nn::AdamState<float>& opt, RolloutBuffer& buffer,
                         const PPOConfig& cfg, double& lr, RngStream& shuffle_rng) {
  UpdateMetrics metrics;
  const int64_t n = buffer.size();
  const int64_t mb_size = n / cfg.minibatches;
  std::vector<int64_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  int minibatch_count = 0;
  MinibatchData mb;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Deterministic Fisher-Yates shuffle.
    for (int64_t i = n - 1; i > 0; --i) {
      const int64_t j = static_cast<int64_t>(shuffle_rng.below(i + 1));
      std::swap(order[i], order[j]);
    }
    for (int m = 0; m < cfg.minibatches; ++m) {
      gather(buffer, order, m * mb_size, (m + 1) * mb_size, mb);

      PPOBatchView view{mb.obs.data(), mb.action.data(), mb.logp.data(), mb.adv.data(),
                        mb.ret.data(), mb.mask.data(), static_cast<int>(mb_size), buffer.obs_dim};
      nn::Tape<float> tape;
      double mask_total = 0;
      const auto loss = build_ppo_loss(tape, ac.params, ac.actor_spec, ac.critic_spec, view,
                                       cfg.clip_range, cfg.value_coef, cfg.entropy_coef,
                                       &mask_total);
      const float loss_value = tape.val(loss).data[0];
      if (!std::isfinite(loss_value)) {
        metrics.skipped_minibatches += 1;
        continue;
      }
      ac.params.zero_grad();
      tape.backward(loss);
      metrics.grad_norm += nn::clip_global_grad_norm(ac.params, cfg.max_grad_norm);

      nn::AdamConfig adam;
      adam.lr = lr;
      opt.step(ac.params, adam);

      // Exact diagonal-Gaussian KL(old || new) on this minibatch, then the
      // adaptive learning-rate rule.
      std::vector<float> new_mean(mb_size * ActorCritic::kActDim);
      ac.mean_value(mb.obs.data(), mb_size, new_mean.data(), nullptr);
      const auto& ls = ac.params.value("log_std").data;
      double kl_sum = 0, clip_count = 0, mask_count = 0;
      for (int64_t k = 0; k < mb_size; ++k) {
        if (mb.mask[k] == 0.f) continue;
        mask_count += 1;
        double mu_old[ActorCritic::kActDim], sd_old[ActorCritic::kActDim];
        double mu_new[ActorCritic::kActDim], sd_new[ActorCritic::kActDim];
        for (int j = 0; j < ActorCritic::kActDim; ++j) {
          mu_old[j] = mb.mean_old[k * ActorCritic::kActDim + j];
          sd_old[j] = mb.std_old[k * ActorCritic::kActDim + j];
          mu_new[j] = new_mean[k * ActorCritic::kActDim + j];
          sd_new[j] = std::exp(static_cast<double>(ls[j]));
        }
        kl_sum += nn::gaussian_kl(mu_old, sd_old, mu_new, sd_new, ActorCritic::kActDim);
        const double logp_new = nn::gaussian_log_prob_eval(
            new_mean.data() + k * ActorCritic::kActDim, ls.data(),
            mb.action.data() + k * ActorCritic::kActDim, ActorCritic::kActDim);
        const double ratio = std::exp(logp_new - mb.logp[k]);
        if (std::fabs(ratio - 1.0) > cfg.clip_range) clip_count += 1;
      }
      const double kl = mask_count > 0 ? kl_sum / mask_count : 0.0;
      lr = adapt_lr(kl, cfg.desired_kl, lr, cfg.lr_min, cfg.lr_max);

      metrics.kl += kl;
      metrics.clip_fraction += mask_count > 0 ? clip_count / mask_count : 0.0;
      minibatch_count += 1;
    }
  }

  if (minibatch_count > 0) {
    metrics.kl /= minibatch_count;
    metrics.clip_fraction /= minibatch_count;
    metrics.grad_norm /= minibatch_count;
  }
  metrics.lr_after = lr;

  // Entropy reported from the final log_std.
  metrics.entropy =
      nn::gaussian_entropy_eval(ac.params.value("log_std").data.data(), ActorCritic::kActDim);
  return metrics;
}

void GaussianActorPolicy::act(const std::vector<double>& obs, int n_envs,
                              std::vector<RngStream>& rngs, std::vector<double>& out) {
  const int d = ac_->obs_dim;
  std::vector<float> norm_obs(static_cast<size_t>(n_envs) * d);
  norm_->normalize(obs.data(), norm_obs.data(), n_envs);
  std::vector<float> mean(static_cast<size_t>(n_envs) * ActorCritic::kActDim);
  ac_->mean_value(norm_obs.data(), n_envs, mean.data(), nullptr);
  const auto& ls = ac_->params.value("log_std").data;
  out.resize(static_cast<size_t>(n_envs) * ActorCritic::kActDim);
  for (int i = 0; i < n_envs; ++i) {
    for (int j = 0; j < ActorCritic::kActDim; ++j) {
      double a = mean[i * ActorCritic::kActDim + j];
      if (stochastic_) a += std::exp(static_cast<double>(ls[j])) * rngs[i].normal();
      out[i * ActorCritic::kActDim + j] = a;
    }
  }
}

nn::Checkpoint PolicyCheckpoint::to_file() const {
  nn::Checkpoint ck;
  ck.meta["kind"] = "mlp_gaussian";
  ck.meta["format"] = 1;
  ck.meta["obs"] = privileged ? "privileged" : "partial";
  ck.meta["obs_dim"] = ac.obs_dim;
  ck.meta["act_dim"] = ActorCritic::kActDim;
  ck.meta["hidden"] = hidden;
  ck.meta["activation"] = "elu";
  for (const auto& [name, e] : ac.params) {
    ck.params.create(name, e.value.shape);
    ck.params.value(name).data = e.value.data;
  }
  ck.params.create("norm.mean", {ac.obs_dim});
  ck.params.value("norm.mean").data = norm.mean_f32();
  ck.params.create("norm.std", {ac.obs_dim});
  ck.params.value("norm.std").data = norm.std_f32();
  return ck;
}

PolicyCheckpoint PolicyCheckpoint::from_file(const nn::Checkpoint& ck) {
  if (ck.meta.at("kind") != "mlp_gaussian") {
    throw std::runtime_error("checkpoint kind mismatch: expected mlp_gaussian");
  }
  PolicyCheckpoint pc;
  pc.privileged = ck.meta.at("obs") == "privileged";
  pc.hidden = ck.meta.at("hidden").get<std::vector<int>>();
  const int obs_dim = ck.meta.at("obs_dim").get<int>();
  pc.ac = ActorCritic::make(obs_dim, pc.hidden, 0);
  pc.ac.params.copy_values_from(ck.params);
  pc.norm.reset(obs_dim);
  // Rebuild frozen stats from the stored f32 arrays via a synthetic two-point
  // fit: mean +- std reproduces both moments exactly.
  const auto& m = ck.params.value("norm.mean").data;
  const auto& s = ck.params.value("norm.std").data;
  std::vector<double> lo(obs_dim), hi(obs_dim);
  for (int i = 0; i < obs_dim; ++i) {
    lo[i] = static_cast<double>(m[i]) - static_cast<double>(s[i]);
    hi[i] = static_cast<double>(m[i]) + static_cast<double>(s[i]);
  }
  pc.norm.update(lo.data(), 1);
  pc.norm.update(hi.data(), 1);
  pc.norm.freeze(true);
  return pc;
}

}  // namespace bg::ppo
