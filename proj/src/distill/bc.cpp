#include "distill/bc.hpp"

#include <filesystem>
#include <fstream>
#include <numeric>

#include "nn/optim.hpp"

namespace bg::distill {

std::vector<WindowRef> make_windows(const DemoDataset& dataset) {
  std::vector<WindowRef> refs;
  for (size_t e = 0; e < dataset.episodes.size(); ++e) {
    for (int t = 0; t < dataset.episodes[e].length; ++t) {
      refs.push_back({static_cast<int32_t>(e), t});
    }
  }
  return refs;
}

void materialize_window(const DemoDataset& dataset, const WindowRef& ref, int context,
                        const float* norm_mean, const float* norm_std, float* out) {
  const DemoEpisode& ep = dataset.episodes[ref.episode];
  for (int k = 0; k < context; ++k) {
    // Window position k corresponds to step t - context + 1 + k, clamped to
    // the episode start (repeat the first observation).
    int src = ref.t - context + 1 + k;
    if (src < 0) src = 0;
    const float* row = &ep.obs[static_cast<size_t>(src) * kDemoObsDim];
    float* dst = out + static_cast<size_t>(k) * kDemoObsDim;
    for (int i = 0; i < kDemoObsDim; ++i) {
      dst[i] = (row[i] - norm_mean[i]) / norm_std[i];
    }
  }
}

nn::Checkpoint StudentPolicyData::to_file() const {
  nn::Checkpoint ck;
  ck.meta["kind"] = "transformer_bc";
  ck.meta["format"] = 1;
  ck.meta["obs_dim"] = spec.obs_dim;
  ck.meta["act_dim"] = spec.act_dim;
  ck.meta["layers"] = spec.layers;
  ck.meta["embed"] = spec.embed;
  ck.meta["heads"] = spec.heads;
  ck.meta["context"] = spec.context;
  ck.meta["dropout_milli"] = static_cast<int>(spec.dropout * 1000 + 0.5);
  ck.meta["ff_mult"] = spec.ff_mult;
  ck.meta["head_hidden"] = spec.head_hidden;
  ck.meta["action_scale_milli"] = 300;
  for (const auto& [name, e] : params) {
    ck.params.create(name, e.value.shape);
    ck.params.value(name).data = e.value.data;
  }
  ck.params.create("norm.mean", {kDemoObsDim});
  ck.params.value("norm.mean").data = norm_mean;
  ck.params.create("norm.std", {kDemoObsDim});
  ck.params.value("norm.std").data = norm_std;
  return ck;
}

StudentPolicyData StudentPolicyData::from_file(const nn::Checkpoint& ck) {
  if (ck.meta.at("kind") != "transformer_bc") {
    throw std::runtime_error("checkpoint kind mismatch: expected transformer_bc");
  }
  StudentPolicyData d;
  d.spec.obs_dim = ck.meta.at("obs_dim").get<int>();
  d.spec.act_dim = ck.meta.at("act_dim").get<int>();
  d.spec.layers = ck.meta.at("layers").get<int>();
  d.spec.embed = ck.meta.at("embed").get<int>();
  d.spec.heads = ck.meta.at("heads").get<int>();
  d.spec.context = ck.meta.at("context").get<int>();
  d.spec.dropout = ck.meta.at("dropout_milli").get<int>() / 1000.0;
  d.spec.ff_mult = ck.meta.at("ff_mult").get<int>();
  d.spec.head_hidden = ck.meta.at("head_hidden").get<std::vector<int>>();
  RngStream rng(0);
  nn::init_transformer(d.params, "student", d.spec, rng);
  d.params.copy_values_from(ck.params);
  d.norm_mean = ck.params.value("norm.mean").data;
  d.norm_std = ck.params.value("norm.std").data;
  return d;
}

BCResult train_bc(const DemoDataset& dataset, const BCConfig& cfg,
                  const nn::TransformerSpec& spec, const std::vector<float>& norm_mean,
                  const std::vector<float>& norm_std, const std::string& out_dir) {
  if (dataset.episodes.empty()) throw std::invalid_argument("train_bc: empty dataset");
  if (spec.obs_dim != kDemoObsDim || static_cast<int>(norm_mean.size()) != kDemoObsDim ||
      static_cast<int>(norm_std.size()) != kDemoObsDim) {
    throw std::invalid_argument("train_bc: observation dimension mismatch");
  }
  spec.validate();

  BCResult result;
  result.student.spec = spec;
  result.student.norm_mean = norm_mean;
  result.student.norm_std = norm_std;
  RngStream init_rng(RngStream::mix_seed(cfg.seed, 0x696e6974));
  nn::init_transformer(result.student.params, "student", spec, init_rng);

  nn::AdamState<float> opt(result.student.params);
  RngStream shuffle_rng(RngStream::mix_seed(cfg.seed, 0x73687566));
  RngStream dropout_rng(RngStream::mix_seed(cfg.seed, 0x64726f70));

  auto refs = make_windows(dataset);
  const int64_t n = static_cast<int64_t>(refs.size());
  const int ctx = spec.context;

  std::ofstream csv;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    csv.open(out_dir + "/bc_loss.csv");
    csv << "epoch,loss,lr\n";
  }

  nn::ParamStore<float> last_good = result.student.params;
  std::vector<float> x, y;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    for (int64_t i = n - 1; i > 0; --i) {
      const int64_t j = static_cast<int64_t>(shuffle_rng.below(i + 1));
      std::swap(refs[i], refs[j]);
    }
    const int64_t epoch_samples =
        cfg.max_samples_per_epoch > 0 ? std::min<int64_t>(n, cfg.max_samples_per_epoch) : n;
    const double lr = cfg.lr_at(epoch);

    double loss_sum = 0;
    int64_t batches = 0;
    bool aborted = false;
    for (int64_t start = 0; start < epoch_samples; start += cfg.batch_size) {
      const int b = static_cast<int>(std::min<int64_t>(cfg.batch_size, epoch_samples - start));
      x.assign(static_cast<size_t>(b) * ctx * kDemoObsDim, 0.f);
      y.assign(static_cast<size_t>(b) * kDemoActDim, 0.f);
      for (int k = 0; k < b; ++k) {
        const WindowRef& ref = refs[start + k];
        materialize_window(dataset, ref, ctx, norm_mean.data(), norm_std.data(),
                           &x[static_cast<size_t>(k) * ctx * kDemoObsDim]);
        const auto& ep = dataset.episodes[ref.episode];
        std::copy_n(&ep.action[static_cast<size_t>(ref.t) * kDemoActDim], kDemoActDim,
                    &y[static_cast<size_t>(k) * kDemoActDim]);
      }
      nn::Tape<float> tape;
      auto xin = tape.constant(nn::Tensor32::from({b, ctx, kDemoObsDim}, x), "window");
      auto pred = nn::transformer_forward(tape, result.student.params, "student", spec, xin, true,
                                          &dropout_rng);
      auto target = tape.constant(nn::Tensor32::from({b, kDemoActDim}, y), "target");
      auto loss = tape.mean_all(tape.square(tape.sub(pred, target)));
      const float loss_value = tape.val(loss).data[0];
      if (!std::isfinite(loss_value)) {
        result.student.params = last_good;
        aborted = true;
        break;
      }
      result.student.params.zero_grad();
      tape.backward(loss);
      nn::AdamConfig adam;
      adam.lr = lr;
      adam.weight_decay = cfg.weight_decay;
      opt.step(result.student.params, adam);
      loss_sum += loss_value;
      batches += 1;
    }
    if (aborted) break;
    const double mean_loss = batches > 0 ? loss_sum / batches : 0.0;
    result.loss_curve.push_back(mean_loss);
    if (csv.is_open()) {
      csv << epoch << ',' << mean_loss << ',' << lr << '\n';
      csv.flush();
    }
    last_good = result.student.params;
  }
  return result;
}

StudentPolicy::StudentPolicy(const StudentPolicyData* data, int n_envs)
    : data_(data), history_(n_envs) {}

void StudentPolicy::reset_history() {
  for (auto& h : history_) h.clear();
}

void StudentPolicy::act(const std::vector<double>& obs, int n_envs, std::vector<RngStream>&,
                        std::vector<double>& out) {
  const int ctx = data_->spec.context;
  const int d = kDemoObsDim;
  std::vector<float> window(static_cast<size_t>(n_envs) * ctx * d);
  for (int i = 0; i < n_envs; ++i) {
    auto& h = history_[i];
    for (int k = 0; k < d; ++k) {
      const double norm =
          (obs[i * d + k] - data_->norm_mean[k]) / data_->norm_std[k];
      h.push_back(static_cast<float>(norm));
    }
    const int rows = static_cast<int>(h.size()) / d;
    for (int k = 0; k < ctx; ++k) {
      int src = rows - ctx + k;
      if (src < 0) src = 0;  // repeat the first observation
      std::copy_n(&h[static_cast<size_t>(src) * d], d,
                  &window[(static_cast<size_t>(i) * ctx + k) * d]);
    }
    // Bound the ring so long evaluations stay O(context).
    if (rows > 4 * ctx) {
      h.erase(h.begin(), h.begin() + static_cast<int64_t>(rows - ctx) * d);
    }
  }
  auto pred = nn::transformer_eval(const_cast<nn::ParamStore<float>&>(data_->params), "student",
                                   data_->spec, window, n_envs);
  out.resize(static_cast<size_t>(n_envs) * kDemoActDim);
  for (int i = 0; i < n_envs; ++i) {
    const auto action = denormalize_action(&pred[static_cast<size_t>(i) * kDemoActDim]);
    for (int j = 0; j < kDemoActDim; ++j) out[i * kDemoActDim + j] = action[j];
  }
}

}  // namespace bg::distill
