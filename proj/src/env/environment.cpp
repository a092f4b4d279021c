#include "env/environment.hpp"

#include <cmath>
#include <stdexcept>

#include "sim/sdf.hpp"

namespace bg::env {

Environment::Environment(const EnvConfig& config, uint64_t instance_seed)
    : config_(config), instance_rng_(instance_seed) {
  config_.randomization.validate();
  config_.physics.validate();
  if (config_.target_height <= 0) throw std::invalid_argument("target_height must be > 0");

  const InstanceDraw inst = sample_instance(config_.randomization, instance_rng_);
  draw_.instance = inst;
  draw_.noise_joint_sigma = config_.randomization.noise_joint_sigma;
  draw_.noise_force_sigma = config_.randomization.noise_force_sigma;

  model_ = config_.gripper;
  for (int j = 0; j < 9; ++j) {
    model_.pd_stiffness[j] *= inst.p_gain_multiplier;
    model_.pd_damping[j] *= inst.d_gain_multiplier;
  }
  physics_ = config_.physics;
  physics_.object_static_friction = inst.object_static_friction;
  physics_.object_dynamic_friction = inst.object_dynamic_friction;
  physics_.robot_static_friction = inst.robot_static_friction;
  physics_.robot_dynamic_friction = inst.robot_dynamic_friction;

  noise_.enabled = config_.randomization.noise_enabled;
  noise_.joint_sigma = config_.randomization.noise_joint_sigma;
  noise_.force_sigma = config_.randomization.noise_force_sigma;

  reset();
}

void Environment::reset() {
  // Skip seeds whose placement cannot be made penetration-free.
  for (int attempt = 0; attempt < 20; ++attempt) {
    const uint64_t seed = RngStream::mix_seed(instance_rng_.snapshot()[0], ++episode_counter_);
    try {
      apply_reset(seed);
      return;
    } catch (const std::runtime_error&) {
      continue;
    }
  }
  throw std::runtime_error("reset: no penetration-free placement in 20 episode seeds");
}

void Environment::reset_with_seed(uint64_t episode_seed) { apply_reset(episode_seed); }

bool Environment::placement_penetrates() const {
  const auto tips = sim::forward_kinematics(world_.joint_pos, model_);
  for (const auto& tip : tips) {
    const auto sdf = sim::signed_distance(world_.object, world_.body.position,
                                          world_.body.orientation, tip.position);
    if (sdf.distance - model_.fingertip_radius < 0.0) return true;
  }
  return false;
}

void Environment::apply_reset(uint64_t episode_seed) {
  episode_seed_ = episode_seed;
  episode_rng_ = RngStream(episode_seed);
  noise_rng_ = episode_rng_.child(0x6e6f6973);

  EpisodeDraw ep = sample_episode(config_.randomization, episode_rng_);

  const auto home = model_.home_pose();
  for (int j = 0; j < 9; ++j) {
    world_.joint_pos[j] = home[j] + ep.joint_offsets[j];
    world_.joint_vel[j] = 0.0;
  }
  world_.joint_targets = world_.joint_pos;

  const auto& shape = sim::catalog_entry(config_.object_id);
  bool placed = false;
  for (int attempt = 0; attempt < 10; ++attempt) {
    sim::place_object(world_, shape, ep.object_x, ep.object_y, draw_.instance.mass_multiplier,
                      config_.object_density);
    if (!placement_penetrates()) {
      placed = true;
      break;
    }
    ep.object_x = episode_rng_.uniform(-config_.randomization.object_xy_range,
                                       config_.randomization.object_xy_range);
    ep.object_y = episode_rng_.uniform(-config_.randomization.object_xy_range,
                                       config_.randomization.object_xy_range);
  }
  if (!placed) {
    throw std::runtime_error("reset seed " + std::to_string(episode_seed) +
                             ": object placement penetrates fingertips after 10 resamples");
  }
  draw_.episode = ep;

  world_.time = 0.0;
  world_.valid = true;
  prev_action_.fill(0.0);
  steps_ = 0;
  lifted_streak_ = 0;

  // Settle the contact set so the first observation is consistent.
  sim::resolve_contacts(world_, model_, physics_);
  status_ = compute_status(false);
}

bool Environment::lifted_now() const {
  if (world_.body.position.z < config_.target_height) return false;
  for (const auto& c : world_.contacts) {
    if (c.fingertip_index == sim::ContactPoint::kGround) return false;
  }
  return true;
}

EpisodeStatus Environment::compute_status(bool world_invalid) {
  EpisodeStatus s;
  s.elapsed = steps_ * physics_.control_dt();
  s.target_height = config_.target_height;
  s.object_height = world_.body.position.z;
  const double object_xy[2] = {world_.body.position.x, world_.body.position.y};
  const Vec3 c = model_.center_xy();
  const double center_xy[2] = {c.x, c.y};
  s.planar_distance = reward::planar_distance(object_xy, center_xy);
  const auto uni = sim::uniaxial_forces(world_, model_, physics_.uniaxial_threshold);
  s.contact_count = 0;
  for (double u : uni) {
    if (u > 0.1) ++s.contact_count;
  }

  if (world_invalid) {
    s.terminated = true;
    s.cause = TerminationCause::Invalid;
  } else if (s.planar_distance >= reward::kWorkspaceRadius) {
    s.terminated = true;
    s.cause = TerminationCause::ObjectEscape;
  } else if (s.elapsed >= config_.effective_horizon() - 1e-9) {
    s.terminated = true;
    s.cause = TerminationCause::Timeout;
  }
  return s;
}

StepResult Environment::step(const Action& action) {
  if (status_.terminated) throw std::logic_error("step called on terminated episode");

  const Action applied = action.clipped();
  std::array<double, 9> targets = world_.joint_targets;
  for (int j = 0; j < 9; ++j) {
    targets[j] = std::clamp(targets[j] + applied.delta_theta[j], model_.joint_min[j],
                            model_.joint_max[j]);
  }

  Vec3 disturbance{0, 0, 0};
  double window_begin = 0.0, window_end = -1.0;
  if (config_.randomization.disturbance_enabled && !config_.demo_mode) {
    disturbance = {draw_.episode.disturbance_force[0], draw_.episode.disturbance_force[1],
                   draw_.episode.disturbance_force[2]};
    window_begin = draw_.episode.disturbance_start;
    window_end = window_begin + config_.randomization.disturbance_duration;
  }

  // Average the force over the control period so the applied impulse matches
  // the scheduled window exactly even when it straddles step boundaries.
  const double t0 = world_.time;
  const double t1 = t0 + physics_.control_dt();
  Vec3 mean_force{0, 0, 0};
  if (window_end > window_begin) {
    const double overlap = std::max(0.0, std::min(t1, window_end) - std::max(t0, window_begin));
    mean_force = disturbance * (overlap / (t1 - t0));
  }

  sim::step_physics(world_, targets, model_, physics_, mean_force);
  steps_ += 1;

  // Reward from this tick's post-step state.
  const bool invalid = !world_.valid;
  status_ = compute_status(invalid);

  reward::RewardInputs in;
  in.object_height = world_.body.position.z;
  in.target_height = config_.target_height;
  in.object_xy[0] = world_.body.position.x;
  in.object_xy[1] = world_.body.position.y;
  const Vec3 c = model_.center_xy();
  in.center_xy[0] = c.x;
  in.center_xy[1] = c.y;
  in.contact_count = status_.contact_count;
  in.joint_angles = world_.joint_pos;
  in.joint_min = model_.joint_min;
  in.joint_max = model_.joint_max;
  in.action = applied.delta_theta;
  in.prev_action = prev_action_;
  // An invalid world's state cannot be trusted; the transition is masked
  // upstream, so report a zero breakdown instead of NaNs.
  const auto breakdown =
      invalid ? reward::RewardBreakdown{} : reward::total_reward(in, config_.weights);

  prev_action_ = applied.delta_theta;
  lifted_streak_ = (!invalid && lifted_now()) ? lifted_streak_ + 1 : 0;

  return {breakdown, status_};
}

namespace {

void put_rng(BinWriter& w, const RngStream& rng) {
  const auto s = rng.snapshot();
  w.put_u64_array(s.data(), 4);
}

RngStream get_rng(BinReader& r) {
  const auto v = r.get_u64_array();
  RngStream rng;
  rng.restore({v[0], v[1], v[2], v[3]});
  return rng;
}

void put_anchor(BinWriter& w, const sim::StictionAnchor& a) {
  w.put_u8(a.active ? 1 : 0);
  w.put_f64(a.anchor.x);
  w.put_f64(a.anchor.y);
  w.put_f64(a.anchor.z);
}

sim::StictionAnchor get_anchor(BinReader& r) {
  sim::StictionAnchor a;
  a.active = r.get_u8() != 0;
  a.anchor.x = r.get_f64();
  a.anchor.y = r.get_f64();
  a.anchor.z = r.get_f64();
  return a;
}

}  // namespace

void Environment::serialize(BinWriter& w) const {
  for (double v : world_.joint_pos) w.put_f64(v);
  for (double v : world_.joint_vel) w.put_f64(v);
  for (double v : world_.joint_targets) w.put_f64(v);
  const auto& b = world_.body;
  for (double v : {b.position.x, b.position.y, b.position.z, b.orientation.w, b.orientation.x,
                   b.orientation.y, b.orientation.z, b.linear_velocity.x, b.linear_velocity.y,
                   b.linear_velocity.z, b.angular_velocity.x, b.angular_velocity.y,
                   b.angular_velocity.z, b.mass, b.inertia.x, b.inertia.y, b.inertia.z}) {
    w.put_f64(v);
  }
  w.put_f64(world_.time);
  w.put_u8(world_.valid ? 1 : 0);
  for (const auto& a : world_.tip_object_anchor) put_anchor(w, a);
  for (const auto& a : world_.tip_ground_anchor) put_anchor(w, a);
  w.put_u32(static_cast<uint32_t>(world_.ground_anchor.size()));
  for (const auto& a : world_.ground_anchor) put_anchor(w, a);

  w.put_u32(static_cast<uint32_t>(world_.contacts.size()));
  for (const auto& c : world_.contacts) {
    w.put_i64(c.fingertip_index);
    for (double v : {c.position.x, c.position.y, c.position.z, c.force_world.x, c.force_world.y,
                     c.force_world.z, c.normal_world.x, c.normal_world.y, c.normal_world.z,
                     c.penetration}) {
      w.put_f64(v);
    }
  }

  for (double v : draw_.episode.joint_offsets) w.put_f64(v);
  w.put_f64(draw_.episode.object_x);
  w.put_f64(draw_.episode.object_y);
  for (double v : draw_.episode.disturbance_force) w.put_f64(v);
  w.put_f64(draw_.episode.disturbance_start);
  for (double v : prev_action_) w.put_f64(v);
  w.put_u32(static_cast<uint32_t>(steps_));
  w.put_u32(static_cast<uint32_t>(lifted_streak_));
  w.put_u64(episode_counter_);
  w.put_u64(episode_seed_);
  put_rng(w, instance_rng_);
  put_rng(w, episode_rng_);
  put_rng(w, noise_rng_);
  w.put_u8(status_.terminated ? 1 : 0);
  w.put_u8(static_cast<uint8_t>(status_.cause));
  w.put_f64(status_.elapsed);
  w.put_f64(status_.object_height);
  w.put_f64(status_.planar_distance);
  w.put_u32(static_cast<uint32_t>(status_.contact_count));
}

void Environment::deserialize(BinReader& r) {
  for (double& v : world_.joint_pos) v = r.get_f64();
  for (double& v : world_.joint_vel) v = r.get_f64();
  for (double& v : world_.joint_targets) v = r.get_f64();
  auto& b = world_.body;
  b.position = {r.get_f64(), r.get_f64(), r.get_f64()};
  b.orientation = {r.get_f64(), r.get_f64(), r.get_f64(), r.get_f64()};
  b.linear_velocity = {r.get_f64(), r.get_f64(), r.get_f64()};
  b.angular_velocity = {r.get_f64(), r.get_f64(), r.get_f64()};
  b.mass = r.get_f64();
  b.inertia = {r.get_f64(), r.get_f64(), r.get_f64()};
  world_.time = r.get_f64();
  world_.valid = r.get_u8() != 0;
  for (auto& a : world_.tip_object_anchor) a = get_anchor(r);
  for (auto& a : world_.tip_ground_anchor) a = get_anchor(r);
  world_.ground_anchor.resize(r.get_u32());
  for (auto& a : world_.ground_anchor) a = get_anchor(r);
  world_.object = sim::catalog_entry(config_.object_id);

  world_.contacts.resize(r.get_u32());
  for (auto& c : world_.contacts) {
    c.fingertip_index = static_cast<int>(r.get_i64());
    c.position = {r.get_f64(), r.get_f64(), r.get_f64()};
    c.force_world = {r.get_f64(), r.get_f64(), r.get_f64()};
    c.normal_world = {r.get_f64(), r.get_f64(), r.get_f64()};
    c.penetration = r.get_f64();
  }

  for (double& v : draw_.episode.joint_offsets) v = r.get_f64();
  draw_.episode.object_x = r.get_f64();
  draw_.episode.object_y = r.get_f64();
  for (double& v : draw_.episode.disturbance_force) v = r.get_f64();
  draw_.episode.disturbance_start = r.get_f64();
  for (double& v : prev_action_) v = r.get_f64();
  steps_ = static_cast<int>(r.get_u32());
  lifted_streak_ = static_cast<int>(r.get_u32());
  episode_counter_ = r.get_u64();
  episode_seed_ = r.get_u64();
  instance_rng_ = get_rng(r);
  episode_rng_ = get_rng(r);
  noise_rng_ = get_rng(r);
  status_.terminated = r.get_u8() != 0;
  status_.cause = static_cast<TerminationCause>(r.get_u8());
  status_.elapsed = r.get_f64();
  status_.object_height = r.get_f64();
  status_.planar_distance = r.get_f64();
  status_.contact_count = static_cast<int>(r.get_u32());
  status_.target_height = config_.target_height;
}

std::vector<double> Environment::privileged_obs() {
  return build_privileged_obs(world_, model_, physics_, prev_action_, noise_, &noise_rng_);
}

std::vector<double> Environment::partial_obs() {
  return build_partial_obs(world_, model_, physics_, noise_, &noise_rng_);
}

std::vector<double> Environment::privileged_obs_clean() const {
  NoiseModel off;
  off.enabled = false;
  return build_privileged_obs(world_, model_, physics_, prev_action_, off, nullptr);
}

std::vector<double> Environment::partial_obs_clean() const {
  NoiseModel off;
  off.enabled = false;
  return build_partial_obs(world_, model_, physics_, off, nullptr);
}

}  // namespace bg::env
