#pragma once

#include <string>
#include <vector>

#include "env/batch.hpp"
#include "nn/checkpoint.hpp"
#include "nn/gaussian.hpp"
#include "nn/model.hpp"
#include "nn/optim.hpp"
#include "ppo/normalizer.hpp"

namespace bg::ppo {

struct PPOConfig {
  int n_envs = 9000;
  int steps_per_env = 24;
  int max_iterations = 4500;
  int epochs = 5;
  int minibatches = 6;
  double learning_rate = 1e-3;
  double entropy_coef = 0.003;
  double value_coef = 1.0;
  double clip_range = 0.2;
  double gamma = 0.99;
  double lam = 0.95;
  double desired_kl = 0.01;
  double max_grad_norm = 1.0;
  double action_clip = 0.3;
  double lr_min = 1e-6;
  double lr_max = 1e-2;
  double init_log_std = 0.0;

  //! Throws std::invalid_argument on inconsistent settings (e.g. minibatches
  //! not dividing the rollout sample count).
  void validate() const;
};

//! Gaussian-policy actor plus value critic over the same observation.
struct ActorCritic {
  nn::MLPSpec actor_spec;
  nn::MLPSpec critic_spec;
  nn::ParamStore<float> params;  // "actor.*", "critic.*", "log_std"
  int obs_dim = 0;
  static constexpr int kActDim = 9;

  static ActorCritic make(int obs_dim, const std::vector<int>& hidden, uint64_t seed,
                          double init_log_std = 0.0);

  //! Fast inference: policy mean and state value for a row-major batch.
  void mean_value(const float* obs, int64_t n, float* mean_out, float* value_out) const;

  std::vector<float> log_std() const { return params.value("log_std").data; }
};

//! One rollout's worth of transitions, laid out [step][env].
struct RolloutBuffer {
  int steps = 0, envs = 0, obs_dim = 0;
  std::vector<float> obs;        // normalized observations, [T*N*D]
  std::vector<float> action;     // unclipped Gaussian samples, [T*N*9]
  std::vector<float> mean;       // behavior-policy mean, [T*N*9]
  std::vector<float> stddev;     // behavior-policy std, [T*N*9]
  std::vector<float> logp;       // [T*N]
  std::vector<float> value;      // [T*N]
  std::vector<float> reward;     // [T*N]
  std::vector<uint8_t> done;     // episode ended at this step
  std::vector<uint8_t> timeout;  // ended via time limit (bootstrap V)
  std::vector<float> bootstrap_value;  // V(next obs) when timeout or buffer end
  std::vector<uint8_t> valid;    // 0 for masked-out (invalid physics) samples
  std::vector<float> advantage;  // filled by compute_gae
  std::vector<float> returns;

  void resize(int steps_, int envs_, int obs_dim_);
  int64_t size() const { return static_cast<int64_t>(steps) * envs; }
  int64_t idx(int t, int n) const { return static_cast<int64_t>(t) * envs + n; }
};

//! GAE(gamma, lambda) with episode-boundary masking and timeout bootstrap.
//! returns[i] = advantage[i] + value[i].
void compute_gae(RolloutBuffer& buffer, double gamma, double lam);

//! Normalizes buffer advantages in place over valid entries (mean 0, std 1).
void normalize_advantages(RolloutBuffer& buffer);

//! KL-adaptive learning rate rule.
double adapt_lr(double kl_measured, double desired_kl, double lr, double lr_min = 1e-6,
                double lr_max = 1e-2);

struct PPOBatchView {
  const float* obs;      // [B, D]
  const float* action;   // [B, 9]
  const float* logp_old; // [B]
  const float* adv;      // [B]
  const float* ret;      // [B]
  const float* mask;     // [B] 1/0
  int batch = 0;
  int obs_dim = 0;
};

//! Builds the clipped-surrogate + value + entropy loss on a tape. Templated
//! so the 64-bit instantiation can be finite-difference checked.
template <typename T>
typename nn::Tape<T>::Id build_ppo_loss(nn::Tape<T>& tape, nn::ParamStore<T>& params,
                                        const nn::MLPSpec& actor_spec,
                                        const nn::MLPSpec& critic_spec, const PPOBatchView& batch,
                                        double clip_range, double value_coef, double entropy_coef,
                                        double* mask_total_out = nullptr) {
  using Tensor = nn::Tensor<T>;
  const int b = batch.batch, d = batch.obs_dim;
  auto to_tensor = [&](const float* p, std::vector<int> shape) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (int64_t i = 0; i < t.numel(); ++i) t.data[i] = static_cast<T>(p[i]);
    return t;
  };
  double mask_total = 0;
  for (int i = 0; i < b; ++i) mask_total += batch.mask[i];
  if (mask_total < 1) mask_total = 1;
  if (mask_total_out) *mask_total_out = mask_total;

  auto obs = tape.constant(to_tensor(batch.obs, {b, d}), "obs");
  auto actions = tape.constant(to_tensor(batch.action, {b, ActorCritic::kActDim}), "actions");
  auto mask = tape.constant(to_tensor(batch.mask, {b}), "mask");

  auto mean = nn::mlp_forward(tape, params, "actor", actor_spec, obs);
  auto log_std = tape.param(params, "log_std");
  auto logp = nn::gaussian_log_prob(tape, mean, log_std, actions);

  auto logp_old = tape.constant(to_tensor(batch.logp_old, {b}), "logp_old");
  auto ratio = tape.exp(tape.sub(logp, logp_old));
  auto adv = tape.constant(to_tensor(batch.adv, {b}), "advantage");
  auto surr1 = tape.mul(ratio, adv);
  auto surr2 = tape.mul(tape.clamp(ratio, static_cast<T>(1.0 - clip_range),
                                   static_cast<T>(1.0 + clip_range)),
                        adv);
  auto surrogate = tape.mul(tape.min2(surr1, surr2), mask);
  auto policy_loss = tape.scale(tape.sum_all(surrogate), static_cast<T>(-1.0 / mask_total));

  auto value_pred = nn::mlp_forward(tape, params, "critic", critic_spec, obs);  // [B,1]
  auto ret = tape.constant(to_tensor(batch.ret, {b, 1}), "returns");
  auto verr = tape.mul(tape.sum_rows(tape.square(tape.sub(value_pred, ret))), mask);
  auto value_loss = tape.scale(tape.sum_all(verr), static_cast<T>(1.0 / mask_total));

  auto entropy = nn::gaussian_entropy(tape, log_std);

  auto loss = tape.add(policy_loss, tape.scale(value_loss, static_cast<T>(value_coef)));
  return tape.add(loss, tape.scale(entropy, static_cast<T>(-entropy_coef)));
}

struct UpdateMetrics {
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double kl = 0;
  double clip_fraction = 0;
  double grad_norm = 0;
  double lr_after = 0;
  int skipped_minibatches = 0;
};

//! 5 epochs x minibatches of clipped-surrogate updates with per-minibatch
//! KL-adaptive learning rate. lr is updated in place.
UpdateMetrics ppo_update(ActorCritic& ac, nn::AdamState<float>& opt, RolloutBuffer& buffer,
                         const PPOConfig& cfg, double& lr, RngStream& shuffle_rng);

//! Batched stochastic rollout policy backed by an ActorCritic + frozen stats;
//! used for demo collection and evaluation.
class GaussianActorPolicy : public env::BatchPolicy {
 public:
  GaussianActorPolicy(const ActorCritic* ac, const RunningNormalizer* norm, bool privileged,
                      bool stochastic)
      : ac_(ac), norm_(norm), privileged_(privileged), stochastic_(stochastic) {}

  int obs_dim() const override { return ac_->obs_dim; }
  bool wants_privileged() const override { return privileged_; }
  void act(const std::vector<double>& obs, int n_envs, std::vector<RngStream>& rngs,
           std::vector<double>& out) override;

 private:
  const ActorCritic* ac_;
  const RunningNormalizer* norm_;
  bool privileged_;
  bool stochastic_;
};

//! Teacher/partial-RL checkpoint contents.
struct PolicyCheckpoint {
  ActorCritic ac;
  RunningNormalizer norm;   // frozen eval stats (f32-roundtripped)
  bool privileged = true;
  std::vector<int> hidden;

  nn::Checkpoint to_file() const;
  static PolicyCheckpoint from_file(const nn::Checkpoint& ck);
};

}  // namespace bg::ppo
