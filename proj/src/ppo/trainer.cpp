#include "ppo/trainer.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>

#include "env/observation.hpp"

namespace bg::ppo {

TeacherTrainer::TeacherTrainer(const TeacherTrainConfig& cfg)
    : cfg_(cfg),
      envs_(env::make_env_batch(cfg.env, cfg.objects, cfg.ppo.n_envs,
                                RngStream::mix_seed(cfg.seed, 0x656e76))),
      ac_(ActorCritic::make(cfg.partial_obs ? env::partial_dim() : env::privileged_dim(),
                            cfg.hidden, RngStream::mix_seed(cfg.seed, 0x6e6574),
                            cfg.ppo.init_log_std)),
      norm_(ac_.obs_dim),
      opt_(ac_.params),
      shuffle_rng_(RngStream::mix_seed(cfg.seed, 0x73687566)),
      lr_(cfg.ppo.learning_rate) {
  cfg_.ppo.validate();
  action_rngs_.reserve(cfg.ppo.n_envs);
  for (int i = 0; i < cfg.ppo.n_envs; ++i) {
    action_rngs_.emplace_back(RngStream::mix_seed(RngStream::mix_seed(cfg.seed, 0x616374), i));
  }
  tracker_.reset(cfg.ppo.n_envs);
}

TrainLogRow TeacherTrainer::iterate() {
  const auto t0 = std::chrono::steady_clock::now();
  collect_rollouts(envs_, ac_, norm_, cfg_.ppo, !cfg_.partial_obs, action_rngs_, buffer_,
                   tracker_, cfg_.worker_threads);
  compute_gae(buffer_, cfg_.ppo.gamma, cfg_.ppo.lam);
  normalize_advantages(buffer_);
  const UpdateMetrics metrics = ppo_update(ac_, opt_, buffer_, cfg_.ppo, lr_, shuffle_rng_);
  iteration_ += 1;

  TrainLogRow row;
  row.iteration = iteration_;
  if (!tracker_.finished_returns.empty()) {
    double sum = 0;
    for (double r : tracker_.finished_returns) sum += r;
    row.return_mean = sum / tracker_.finished_returns.size();
    double var = 0;
    for (double r : tracker_.finished_returns) var += (r - row.return_mean) * (r - row.return_mean);
    row.return_std = std::sqrt(var / tracker_.finished_returns.size());
    row.success_proxy = static_cast<double>(tracker_.finished_success) / tracker_.finished_count;
  }
  row.kl = metrics.kl;
  row.lr = lr_;
  row.clip_fraction = metrics.clip_fraction;
  row.entropy = metrics.entropy;
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return row;
}

PolicyCheckpoint TeacherTrainer::snapshot_policy() const {
  PolicyCheckpoint pc;
  pc.ac = ac_;
  pc.norm = norm_;
  pc.norm.freeze(true);
  pc.privileged = !cfg_.partial_obs;
  pc.hidden = cfg_.hidden;
  return pc;
}

PolicyCheckpoint TeacherTrainer::run(const std::function<void(const TrainLogRow&)>& on_log) {
  namespace fs = std::filesystem;
  std::ofstream csv;
  if (!cfg_.out_dir.empty()) {
    fs::create_directories(cfg_.out_dir);
    const bool fresh = !fs::exists(cfg_.out_dir + "/training_log.csv");
    csv.open(cfg_.out_dir + "/training_log.csv", std::ios::app);
    if (fresh) {
      csv << "iteration,return_mean,return_std,kl,lr,clip_fraction,success_proxy,entropy,"
             "wall_seconds\n";
    }
  }
  while (iteration_ < cfg_.ppo.max_iterations) {
    const TrainLogRow row = iterate();
    if (csv.is_open()) {
      csv << row.iteration << ',' << row.return_mean << ',' << row.return_std << ',' << row.kl
          << ',' << row.lr << ',' << row.clip_fraction << ',' << row.success_proxy << ','
          << row.entropy << ',' << row.wall_seconds << '\n';
      csv.flush();
    }
    if (on_log) on_log(row);
    if (!cfg_.out_dir.empty() && cfg_.checkpoint_every > 0 &&
        iteration_ % cfg_.checkpoint_every == 0 && iteration_ < cfg_.ppo.max_iterations) {
      snapshot_policy().to_file().save(cfg_.out_dir + "/teacher_iter" +
                                       std::to_string(iteration_) + ".ckpt");
    }
  }
  PolicyCheckpoint final_policy = snapshot_policy();
  if (!cfg_.out_dir.empty()) {
    final_policy.to_file().save(cfg_.out_dir + "/teacher_final.ckpt");
  }
  return final_policy;
}

void TeacherTrainer::save_session(const std::string& path) const {
  BinWriter w;
  w.put_u32(0x42475453);  // "BGTS"
  w.put_u32(1);
  w.put_u32(static_cast<uint32_t>(iteration_));
  w.put_f64(lr_);

  // Parameters and optimizer moments, in deterministic name order.
  const auto names = ac_.params.names();
  w.put_u32(static_cast<uint32_t>(names.size()));
  auto& moments = const_cast<nn::AdamState<float>&>(opt_).moments();
  for (const auto& name : names) {
    w.put_string(name);
    const auto& v = ac_.params.value(name);
    w.put_f32_array(v.ptr(), v.data.size());
    const auto& m = moments.at(name);
    w.put_f32_array(m.first.ptr(), m.first.data.size());
    w.put_f32_array(m.second.ptr(), m.second.data.size());
  }
  w.put_u64(static_cast<uint64_t>(opt_.step_count()));
  norm_.serialize(w);

  const auto sh = shuffle_rng_.snapshot();
  w.put_u64_array(sh.data(), 4);
  w.put_u32(static_cast<uint32_t>(envs_.size()));
  for (size_t i = 0; i < envs_.size(); ++i) {
    const auto s = action_rngs_[i].snapshot();
    w.put_u64_array(s.data(), 4);
    envs_[i]->serialize(w);
    w.put_f64(tracker_.episode_return[i]);
    w.put_u8(tracker_.episode_success[i]);
  }

  auto bytes = w.bytes();
  const uint32_t crc = crc32(bytes.data(), bytes.size());
  BinWriter tail;
  tail.put_u32(crc);
  bytes.insert(bytes.end(), tail.bytes().begin(), tail.bytes().end());
  write_file(path, bytes);
}

void TeacherTrainer::load_session(const std::string& path) {
  const auto bytes = read_file(path);
  if (bytes.size() < 8) throw std::runtime_error("session file too short");
  uint32_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 4, 4);
  if (stored != crc32(bytes.data(), bytes.size() - 4)) {
    throw std::runtime_error("session file CRC mismatch");
  }
  BinReader r(bytes.data(), bytes.size() - 4);
  if (r.get_u32() != 0x42475453) throw std::runtime_error("not a training session file");
  if (r.get_u32() != 1) throw std::runtime_error("unsupported session version");
  iteration_ = static_cast<int>(r.get_u32());
  lr_ = r.get_f64();

  const uint32_t n_params = r.get_u32();
  auto& moments = opt_.moments();
  for (uint32_t k = 0; k < n_params; ++k) {
    const std::string name = r.get_string();
    ac_.params.value(name).data = r.get_f32_array();
    auto& m = moments.at(name);
    m.first.data = r.get_f32_array();
    m.second.data = r.get_f32_array();
  }
  opt_.set_step_count(static_cast<int64_t>(r.get_u64()));
  norm_ = RunningNormalizer::deserialize(r);

  const auto sh = r.get_u64_array();
  shuffle_rng_.restore({sh[0], sh[1], sh[2], sh[3]});
  const uint32_t n_envs = r.get_u32();
  if (n_envs != envs_.size()) throw std::runtime_error("session env count mismatch");
  for (size_t i = 0; i < envs_.size(); ++i) {
    const auto s = r.get_u64_array();
    action_rngs_[i].restore({s[0], s[1], s[2], s[3]});
    envs_[i]->deserialize(r);
    tracker_.episode_return[i] = r.get_f64();
    tracker_.episode_success[i] = r.get_u8();
  }
}

}  // namespace bg::ppo
