#include "config/config.hpp"

#include <json.hpp>

namespace bg::cfg {

using nlohmann::json;

void PipelineConfig::validate() const {
  env.physics.validate();
  env.randomization.validate();
  if (env.target_height <= 0) throw std::invalid_argument("env.target_height must be > 0");
  teacher.validate();
  if (teacher_hidden.empty()) throw std::invalid_argument("teacher.hidden must not be empty");
  for (const auto& id : train_objects) sim::catalog_entry(id);
  for (const auto& id : eval_objects) sim::catalog_entry(id);
  curation.validate();
  student.validate();
  if (bc.batch_size < 1 || bc.epochs < 1) throw std::invalid_argument("student.batch/epochs");
  if (eval_protocol.trials_per_object < 1) {
    throw std::invalid_argument("eval.trials_per_object must be >= 1");
  }
}

PipelineConfig desk_profile() {
  PipelineConfig c;
  c.profile = "desk";
  c.teacher.n_envs = 256;
  c.teacher.max_iterations = 600;
  c.teacher_hidden = {128, 64, 32};
  c.train_objects = sim::medium_object_ids();
  c.eval_objects = sim::medium_object_ids();

  c.collect.target_count = 2200;
  c.collect.batch_envs = 128;

  c.student.obs_dim = 12;
  c.student.act_dim = 9;
  c.student.layers = 2;
  c.student.embed = 64;
  c.student.heads = 4;
  c.student.context = 30;
  c.student.dropout = 0.1;
  c.student.ff_mult = 2;
  c.student.head_hidden = {256, 256};

  c.bc.batch_size = 256;
  c.bc.epochs = 3;
  c.bc.lr_decay_start_epoch = 1;
  c.bc.learning_rate = 1e-4;

  c.eval_protocol.trials_per_object = 10;
  return c;
}

PipelineConfig paper_profile() {
  PipelineConfig c;
  c.profile = "paper";
  c.teacher.n_envs = 9000;
  c.teacher.max_iterations = 4500;
  c.teacher_hidden = {512, 256, 128};
  c.train_objects = sim::all_object_ids();
  c.eval_objects = sim::medium_object_ids();

  c.collect.target_count = 89500;
  c.collect.batch_envs = 1024;

  c.student.obs_dim = 12;
  c.student.act_dim = 9;
  c.student.layers = 6;
  c.student.embed = 512;
  c.student.heads = 8;
  c.student.context = 30;
  c.student.dropout = 0.1;
  c.student.ff_mult = 4;
  c.student.head_hidden = {1024, 1024};

  c.bc.batch_size = 256;
  c.bc.epochs = 2000;
  c.bc.lr_decay_start_epoch = 100;
  c.bc.learning_rate = 1e-4;

  c.eval_protocol.trials_per_object = 10;
  return c;
}

PipelineConfig profile_by_name(const std::string& name) {
  if (name == "desk") return desk_profile();
  if (name == "paper") return paper_profile();
  throw std::invalid_argument("unknown profile '" + name + "' (expected desk or paper)");
}

namespace {

//! Pulls a typed value, naming the key on type errors.
template <typename T>
void read(const json& j, const char* key, T& out, const std::string& scope) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw std::invalid_argument("config key '" + scope + key + "' has the wrong type");
  }
}

void reject_unknown(const json& j, std::initializer_list<const char*> known,
                    const std::string& scope) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) { ok = true; break; }
    }
    if (!ok) throw std::invalid_argument("unknown config key '" + scope + key + "'");
  }
}

void apply_env(PipelineConfig& c, const json& j) {
  const std::string scope = "env.";
  reject_unknown(j, {"target_height", "horizon", "object_density", "gripper", "physics",
                     "randomization", "weights"},
                 scope);
  read(j, "target_height", c.env.target_height, scope);
  read(j, "horizon", c.env.horizon, scope);
  read(j, "object_density", c.env.object_density, scope);
  if (j.contains("gripper")) {
    const auto& g = j.at("gripper");
    const std::string gs = "env.gripper.";
    reject_unknown(g, {"base_radius", "palm_height", "link1", "link2", "link3",
                       "fingertip_radius", "pd_stiffness", "pd_damping", "torque_limit",
                       "joint_inertia"},
                   gs);
    auto& m = c.env.gripper;
    read(g, "base_radius", m.base_radius, gs);
    read(g, "palm_height", m.palm_height, gs);
    read(g, "link1", m.link1, gs);
    read(g, "link2", m.link2, gs);
    read(g, "link3", m.link3, gs);
    read(g, "fingertip_radius", m.fingertip_radius, gs);
    read(g, "torque_limit", m.torque_limit, gs);
    read(g, "joint_inertia", m.joint_inertia, gs);
    double stiffness = m.pd_stiffness[0], damping = m.pd_damping[0];
    read(g, "pd_stiffness", stiffness, gs);
    read(g, "pd_damping", damping, gs);
    m.pd_stiffness.fill(stiffness);
    m.pd_damping.fill(damping);
  }
  if (j.contains("physics")) {
    const auto& p = j.at("physics");
    const std::string ps = "env.physics.";
    reject_unknown(p, {"gravity", "contact_stiffness", "contact_damping", "physics_dt",
                       "substeps_per_control", "uniaxial_threshold", "stiffness_cap_factor"},
                   ps);
    auto& ph = c.env.physics;
    read(p, "gravity", ph.gravity, ps);
    read(p, "contact_stiffness", ph.contact_stiffness, ps);
    read(p, "contact_damping", ph.contact_damping, ps);
    read(p, "physics_dt", ph.physics_dt, ps);
    read(p, "substeps_per_control", ph.substeps_per_control, ps);
    read(p, "uniaxial_threshold", ph.uniaxial_threshold, ps);
    read(p, "stiffness_cap_factor", ph.stiffness_cap_factor, ps);
  }
  if (j.contains("randomization")) {
    const auto& r = j.at("randomization");
    const std::string rs = "env.randomization.";
    reject_unknown(r, {"joint_offset_range", "object_xy_range", "friction_min", "friction_max",
                       "mass_mult_min", "mass_mult_max", "p_gain_mult_min", "p_gain_mult_max",
                       "d_gain_mult_min", "d_gain_mult_max", "disturbance_enabled",
                       "disturbance_force_range", "disturbance_duration", "disturbance_start_max",
                       "noise_enabled", "noise_joint_sigma", "noise_force_sigma"},
                   rs);
    auto& rd = c.env.randomization;
    read(r, "joint_offset_range", rd.joint_offset_range, rs);
    read(r, "object_xy_range", rd.object_xy_range, rs);
    read(r, "friction_min", rd.friction_min, rs);
    read(r, "friction_max", rd.friction_max, rs);
    read(r, "mass_mult_min", rd.mass_mult_min, rs);
    read(r, "mass_mult_max", rd.mass_mult_max, rs);
    read(r, "p_gain_mult_min", rd.p_gain_mult_min, rs);
    read(r, "p_gain_mult_max", rd.p_gain_mult_max, rs);
    read(r, "d_gain_mult_min", rd.d_gain_mult_min, rs);
    read(r, "d_gain_mult_max", rd.d_gain_mult_max, rs);
    read(r, "disturbance_enabled", rd.disturbance_enabled, rs);
    read(r, "disturbance_force_range", rd.disturbance_force_range, rs);
    read(r, "disturbance_duration", rd.disturbance_duration, rs);
    read(r, "disturbance_start_max", rd.disturbance_start_max, rs);
    read(r, "noise_enabled", rd.noise_enabled, rs);
    read(r, "noise_joint_sigma", rd.noise_joint_sigma, rs);
    read(r, "noise_force_sigma", rd.noise_force_sigma, rs);
  }
  if (j.contains("weights")) {
    const auto& w = j.at("weights");
    const std::string ws = "env.weights.";
    reject_unknown(w, {"task", "incentive", "joint_limit", "action", "action_rate"}, ws);
    read(w, "task", c.env.weights.task, ws);
    read(w, "incentive", c.env.weights.incentive, ws);
    read(w, "joint_limit", c.env.weights.joint_limit, ws);
    read(w, "action", c.env.weights.action, ws);
    read(w, "action_rate", c.env.weights.action_rate, ws);
  }
}

void apply_teacher(PipelineConfig& c, const json& j) {
  const std::string scope = "teacher.";
  reject_unknown(j, {"envs", "steps_per_env", "iterations", "epochs", "minibatches",
                     "learning_rate", "entropy_coef", "value_coef", "clip_range", "gamma",
                     "lambda", "desired_kl", "max_grad_norm", "hidden", "objects",
                     "init_log_std"},
                 scope);
  read(j, "envs", c.teacher.n_envs, scope);
  read(j, "steps_per_env", c.teacher.steps_per_env, scope);
  read(j, "iterations", c.teacher.max_iterations, scope);
  read(j, "epochs", c.teacher.epochs, scope);
  read(j, "minibatches", c.teacher.minibatches, scope);
  read(j, "learning_rate", c.teacher.learning_rate, scope);
  read(j, "entropy_coef", c.teacher.entropy_coef, scope);
  read(j, "value_coef", c.teacher.value_coef, scope);
  read(j, "clip_range", c.teacher.clip_range, scope);
  read(j, "gamma", c.teacher.gamma, scope);
  read(j, "lambda", c.teacher.lam, scope);
  read(j, "desired_kl", c.teacher.desired_kl, scope);
  read(j, "max_grad_norm", c.teacher.max_grad_norm, scope);
  read(j, "init_log_std", c.teacher.init_log_std, scope);
  read(j, "hidden", c.teacher_hidden, scope);
  read(j, "objects", c.train_objects, scope);
}

void apply_collect(PipelineConfig& c, const json& j) {
  const std::string scope = "collect.";
  reject_unknown(j, {"target_count", "max_episodes", "stochastic_teacher", "retain_all",
                     "batch_envs"},
                 scope);
  read(j, "target_count", c.collect.target_count, scope);
  read(j, "max_episodes", c.collect.max_episodes, scope);
  read(j, "stochastic_teacher", c.collect.stochastic_teacher, scope);
  read(j, "retain_all", c.collect.retain_all, scope);
  read(j, "batch_envs", c.collect.batch_envs, scope);
}

void apply_curation(PipelineConfig& c, const json& j) {
  const std::string scope = "curation.";
  reject_unknown(j, {"task_reward_threshold", "sustain_seconds", "episode_horizon",
                     "force_sum_threshold"},
                 scope);
  read(j, "task_reward_threshold", c.curation.task_reward_threshold, scope);
  read(j, "sustain_seconds", c.curation.sustain_seconds, scope);
  read(j, "episode_horizon", c.curation.episode_horizon, scope);
  read(j, "force_sum_threshold", c.curation.force_sum_threshold, scope);
}

void apply_student(PipelineConfig& c, const json& j) {
  const std::string scope = "student.";
  reject_unknown(j, {"layers", "embed", "heads", "context", "dropout", "ff_mult", "head_hidden",
                     "batch_size", "epochs", "learning_rate", "lr_decay_start_epoch",
                     "weight_decay", "max_samples_per_epoch"},
                 scope);
  read(j, "layers", c.student.layers, scope);
  read(j, "embed", c.student.embed, scope);
  read(j, "heads", c.student.heads, scope);
  read(j, "context", c.student.context, scope);
  read(j, "dropout", c.student.dropout, scope);
  read(j, "ff_mult", c.student.ff_mult, scope);
  read(j, "head_hidden", c.student.head_hidden, scope);
  read(j, "batch_size", c.bc.batch_size, scope);
  read(j, "epochs", c.bc.epochs, scope);
  read(j, "learning_rate", c.bc.learning_rate, scope);
  read(j, "lr_decay_start_epoch", c.bc.lr_decay_start_epoch, scope);
  read(j, "weight_decay", c.bc.weight_decay, scope);
  int64_t cap = c.bc.max_samples_per_epoch;
  read(j, "max_samples_per_epoch", cap, scope);
  c.bc.max_samples_per_epoch = cap;
}

void apply_eval(PipelineConfig& c, const json& j) {
  const std::string scope = "eval.";
  reject_unknown(j, {"trials_per_object", "episode_duration", "hold_seconds", "objects",
                     "noise_enabled", "disturbance_enabled"},
                 scope);
  read(j, "trials_per_object", c.eval_protocol.trials_per_object, scope);
  read(j, "episode_duration", c.eval_protocol.episode_duration, scope);
  read(j, "hold_seconds", c.eval_protocol.hold_seconds, scope);
  read(j, "objects", c.eval_objects, scope);
  read(j, "noise_enabled", c.eval_protocol.noise_enabled, scope);
  read(j, "disturbance_enabled", c.eval_protocol.disturbance_enabled, scope);
}

}  // namespace

void apply_json(PipelineConfig& cfg, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  reject_unknown(j, {"profile", "env", "teacher", "collect", "curation", "student", "eval",
                     "worker_threads"},
                 "");
  if (j.contains("env")) apply_env(cfg, j.at("env"));
  if (j.contains("teacher")) apply_teacher(cfg, j.at("teacher"));
  if (j.contains("collect")) apply_collect(cfg, j.at("collect"));
  if (j.contains("curation")) apply_curation(cfg, j.at("curation"));
  if (j.contains("student")) apply_student(cfg, j.at("student"));
  if (j.contains("eval")) apply_eval(cfg, j.at("eval"));
  read(j, "worker_threads", cfg.worker_threads, "");
}

PipelineConfig load_config(const std::string& profile, const std::string& json_path) {
  PipelineConfig cfg = profile_by_name(profile);
  if (!json_path.empty()) {
    const auto bytes = read_file(json_path);
    apply_json(cfg, std::string(bytes.begin(), bytes.end()));
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const PipelineConfig& c) {
  json j;
  j["profile"] = c.profile;
  j["worker_threads"] = c.worker_threads;
  j["env"] = {
      {"target_height", c.env.target_height},
      {"horizon", c.env.horizon},
      {"object_density", c.env.object_density},
      {"gripper",
       {{"base_radius", c.env.gripper.base_radius},
        {"palm_height", c.env.gripper.palm_height},
        {"link1", c.env.gripper.link1},
        {"link2", c.env.gripper.link2},
        {"link3", c.env.gripper.link3},
        {"fingertip_radius", c.env.gripper.fingertip_radius},
        {"pd_stiffness", c.env.gripper.pd_stiffness[0]},
        {"pd_damping", c.env.gripper.pd_damping[0]},
        {"torque_limit", c.env.gripper.torque_limit},
        {"joint_inertia", c.env.gripper.joint_inertia}}},
      {"physics",
       {{"gravity", c.env.physics.gravity},
        {"contact_stiffness", c.env.physics.contact_stiffness},
        {"contact_damping", c.env.physics.contact_damping},
        {"physics_dt", c.env.physics.physics_dt},
        {"substeps_per_control", c.env.physics.substeps_per_control},
        {"uniaxial_threshold", c.env.physics.uniaxial_threshold},
        {"stiffness_cap_factor", c.env.physics.stiffness_cap_factor}}},
      {"randomization",
       {{"joint_offset_range", c.env.randomization.joint_offset_range},
        {"object_xy_range", c.env.randomization.object_xy_range},
        {"friction_min", c.env.randomization.friction_min},
        {"friction_max", c.env.randomization.friction_max},
        {"mass_mult_min", c.env.randomization.mass_mult_min},
        {"mass_mult_max", c.env.randomization.mass_mult_max},
        {"p_gain_mult_min", c.env.randomization.p_gain_mult_min},
        {"p_gain_mult_max", c.env.randomization.p_gain_mult_max},
        {"d_gain_mult_min", c.env.randomization.d_gain_mult_min},
        {"d_gain_mult_max", c.env.randomization.d_gain_mult_max},
        {"disturbance_enabled", c.env.randomization.disturbance_enabled},
        {"disturbance_force_range", c.env.randomization.disturbance_force_range},
        {"disturbance_duration", c.env.randomization.disturbance_duration},
        {"disturbance_start_max", c.env.randomization.disturbance_start_max},
        {"noise_enabled", c.env.randomization.noise_enabled},
        {"noise_joint_sigma", c.env.randomization.noise_joint_sigma},
        {"noise_force_sigma", c.env.randomization.noise_force_sigma}}},
      {"weights",
       {{"task", c.env.weights.task},
        {"incentive", c.env.weights.incentive},
        {"joint_limit", c.env.weights.joint_limit},
        {"action", c.env.weights.action},
        {"action_rate", c.env.weights.action_rate}}}};
  j["teacher"] = {{"envs", c.teacher.n_envs},
                  {"steps_per_env", c.teacher.steps_per_env},
                  {"iterations", c.teacher.max_iterations},
                  {"epochs", c.teacher.epochs},
                  {"minibatches", c.teacher.minibatches},
                  {"learning_rate", c.teacher.learning_rate},
                  {"entropy_coef", c.teacher.entropy_coef},
                  {"value_coef", c.teacher.value_coef},
                  {"clip_range", c.teacher.clip_range},
                  {"gamma", c.teacher.gamma},
                  {"lambda", c.teacher.lam},
                  {"desired_kl", c.teacher.desired_kl},
                  {"max_grad_norm", c.teacher.max_grad_norm},
                  {"init_log_std", c.teacher.init_log_std},
                  {"hidden", c.teacher_hidden},
                  {"objects", c.train_objects}};
  j["collect"] = {{"target_count", c.collect.target_count},
                  {"max_episodes", c.collect.max_episodes},
                  {"stochastic_teacher", c.collect.stochastic_teacher},
                  {"retain_all", c.collect.retain_all},
                  {"batch_envs", c.collect.batch_envs}};
  j["curation"] = {{"task_reward_threshold", c.curation.task_reward_threshold},
                   {"sustain_seconds", c.curation.sustain_seconds},
                   {"episode_horizon", c.curation.episode_horizon},
                   {"force_sum_threshold", c.curation.force_sum_threshold}};
  j["student"] = {{"layers", c.student.layers},
                  {"embed", c.student.embed},
                  {"heads", c.student.heads},
                  {"context", c.student.context},
                  {"dropout", c.student.dropout},
                  {"ff_mult", c.student.ff_mult},
                  {"head_hidden", c.student.head_hidden},
                  {"batch_size", c.bc.batch_size},
                  {"epochs", c.bc.epochs},
                  {"learning_rate", c.bc.learning_rate},
                  {"lr_decay_start_epoch", c.bc.lr_decay_start_epoch},
                  {"weight_decay", c.bc.weight_decay},
                  {"max_samples_per_epoch", c.bc.max_samples_per_epoch}};
  j["eval"] = {{"trials_per_object", c.eval_protocol.trials_per_object},
               {"episode_duration", c.eval_protocol.episode_duration},
               {"hold_seconds", c.eval_protocol.hold_seconds},
               {"objects", c.eval_objects},
               {"noise_enabled", c.eval_protocol.noise_enabled},
               {"disturbance_enabled", c.eval_protocol.disturbance_enabled}};
  return j.dump(2);
}

}  // namespace bg::cfg
