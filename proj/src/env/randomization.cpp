#include "env/randomization.hpp"

#include <stdexcept>

namespace bg::env {

void RandomizationConfig::validate() const {
  if (friction_min > friction_max || friction_min <= 0)
    throw std::invalid_argument("bad friction range");
  if (mass_mult_min > mass_mult_max || mass_mult_min <= 0)
    throw std::invalid_argument("bad mass multiplier range");
  if (p_gain_mult_min > p_gain_mult_max || p_gain_mult_min <= 0)
    throw std::invalid_argument("bad P gain multiplier range");
  if (d_gain_mult_min > d_gain_mult_max || d_gain_mult_min <= 0)
    throw std::invalid_argument("bad D gain multiplier range");
  if (joint_offset_range < 0 || object_xy_range < 0)
    throw std::invalid_argument("bad offset range");
  if (disturbance_duration < 0 || disturbance_start_max < 0 || disturbance_force_range < 0)
    throw std::invalid_argument("bad disturbance settings");
  if (noise_joint_sigma < 0 || noise_force_sigma < 0)
    throw std::invalid_argument("bad noise sigma");
}

InstanceDraw sample_instance(const RandomizationConfig& cfg, RngStream& rng) {
  InstanceDraw d;
  d.object_static_friction = rng.uniform(cfg.friction_min, cfg.friction_max);
  // Dynamic friction must not exceed the sampled static friction.
  d.object_dynamic_friction = rng.uniform(cfg.friction_min, d.object_static_friction);
  d.robot_static_friction = rng.uniform(cfg.friction_min, cfg.friction_max);
  d.robot_dynamic_friction = rng.uniform(cfg.friction_min, d.robot_static_friction);
  d.mass_multiplier = rng.uniform(cfg.mass_mult_min, cfg.mass_mult_max);
  d.p_gain_multiplier = rng.log_uniform(cfg.p_gain_mult_min, cfg.p_gain_mult_max);
  d.d_gain_multiplier = rng.log_uniform(cfg.d_gain_mult_min, cfg.d_gain_mult_max);
  return d;
}

EpisodeDraw sample_episode(const RandomizationConfig& cfg, RngStream& rng) {
  EpisodeDraw d;
  for (int j = 0; j < 9; ++j) {
    d.joint_offsets[j] = rng.uniform(-cfg.joint_offset_range, cfg.joint_offset_range);
  }
  d.object_x = rng.uniform(-cfg.object_xy_range, cfg.object_xy_range);
  d.object_y = rng.uniform(-cfg.object_xy_range, cfg.object_xy_range);
  for (int k = 0; k < 3; ++k) {
    d.disturbance_force[k] = rng.uniform(-cfg.disturbance_force_range, cfg.disturbance_force_range);
  }
  d.disturbance_start = rng.uniform(0.0, cfg.disturbance_start_max);
  return d;
}

std::array<float, RandomizationDraw::kArraySize> RandomizationDraw::to_array() const {
  std::array<float, kArraySize> a{};
  int i = 0;
  for (int j = 0; j < 9; ++j) a[i++] = static_cast<float>(episode.joint_offsets[j]);
  a[i++] = static_cast<float>(episode.object_x);
  a[i++] = static_cast<float>(episode.object_y);
  a[i++] = static_cast<float>(instance.object_static_friction);
  a[i++] = static_cast<float>(instance.object_dynamic_friction);
  a[i++] = static_cast<float>(instance.robot_static_friction);
  a[i++] = static_cast<float>(instance.robot_dynamic_friction);
  a[i++] = static_cast<float>(instance.mass_multiplier);
  a[i++] = static_cast<float>(instance.p_gain_multiplier);
  a[i++] = static_cast<float>(instance.d_gain_multiplier);
  for (int k = 0; k < 3; ++k) a[i++] = static_cast<float>(episode.disturbance_force[k]);
  a[i++] = static_cast<float>(episode.disturbance_start);
  a[i++] = static_cast<float>(noise_joint_sigma);
  a[i++] = static_cast<float>(noise_force_sigma);
  return a;
}

RandomizationDraw RandomizationDraw::from_array(const std::array<float, kArraySize>& a) {
  RandomizationDraw d;
  int i = 0;
  for (int j = 0; j < 9; ++j) d.episode.joint_offsets[j] = a[i++];
  d.episode.object_x = a[i++];
  d.episode.object_y = a[i++];
  d.instance.object_static_friction = a[i++];
  d.instance.object_dynamic_friction = a[i++];
  d.instance.robot_static_friction = a[i++];
  d.instance.robot_dynamic_friction = a[i++];
  d.instance.mass_multiplier = a[i++];
  d.instance.p_gain_multiplier = a[i++];
  d.instance.d_gain_multiplier = a[i++];
  for (int k = 0; k < 3; ++k) d.episode.disturbance_force[k] = a[i++];
  d.episode.disturbance_start = a[i++];
  d.noise_joint_sigma = a[i++];
  d.noise_force_sigma = a[i++];
  return d;
}

}  // namespace bg::env
