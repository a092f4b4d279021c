#pragma once

#include "distill/dataset.hpp"
#include "env/batch.hpp"
#include "nn/checkpoint.hpp"
#include "nn/model.hpp"

namespace bg::distill {

struct BCConfig {
  int batch_size = 256;
  int epochs = 2000;
  double learning_rate = 1e-4;
  int lr_decay_start_epoch = 100;  // constant before, linear decay to 0 after
  double weight_decay = 0.01;      // AdamW L2
  uint64_t seed = 0;
  int64_t max_samples_per_epoch = 0;  // 0 = full pass (desk profile caps this)

  //! Learning rate at a 1-based epoch index.
  double lr_at(int epoch) const {
    if (epoch <= lr_decay_start_epoch) return learning_rate;
    const double span = static_cast<double>(epochs - lr_decay_start_epoch);
    return learning_rate * std::max(0.0, (epochs - epoch) / span);
  }
};

//! One training sample: predict the action at step t of an episode from the
//! context window ending at t.
struct WindowRef {
  int32_t episode = 0;
  int32_t t = 0;
};

//! All (episode, t) pairs; windows never cross episode boundaries.
std::vector<WindowRef> make_windows(const DemoDataset& dataset);

//! Fills out[context * 12] with normalized observations o_{t-context+1..t},
//! left-padded by repeating the first observation of the episode.
void materialize_window(const DemoDataset& dataset, const WindowRef& ref, int context,
                        const float* norm_mean, const float* norm_std, float* out);

//! Student network + the observation statistics baked into its checkpoint.
struct StudentPolicyData {
  nn::TransformerSpec spec;
  nn::ParamStore<float> params;
  std::vector<float> norm_mean;  // 12
  std::vector<float> norm_std;   // 12

  nn::Checkpoint to_file() const;
  static StudentPolicyData from_file(const nn::Checkpoint& ck);
};

struct BCResult {
  StudentPolicyData student;
  std::vector<double> loss_curve;  // per-epoch mean MSE
};

//! Behavioral cloning: minimizes the MSE between the transformer prediction
//! at the final window position and the logged normalized action. Aborts with
//! the last finite-loss parameters if the loss diverges. Throws on an empty
//! dataset or an observation-dimension mismatch.
BCResult train_bc(const DemoDataset& dataset, const BCConfig& cfg,
                  const nn::TransformerSpec& spec, const std::vector<float>& norm_mean,
                  const std::vector<float>& norm_std, const std::string& out_dir = "");

//! Deployment-side student: keeps a per-environment observation history,
//! feeds the context window through the transformer and rescales actions by
//! the 0.3 rad bound. Histories must be cleared between episodes
//! (reset_history); this policy is for protocol-driven evaluation, not for
//! auto-resetting batch runners.
class StudentPolicy : public env::BatchPolicy {
 public:
  StudentPolicy(const StudentPolicyData* data, int n_envs);

  void reset_history();
  int obs_dim() const override { return kDemoObsDim; }
  bool wants_privileged() const override { return false; }
  void act(const std::vector<double>& obs, int n_envs, std::vector<RngStream>& rngs,
           std::vector<double>& out) override;

 private:
  const StudentPolicyData* data_;
  std::vector<std::vector<float>> history_;  // normalized obs rows per env
};

}  // namespace bg::distill
