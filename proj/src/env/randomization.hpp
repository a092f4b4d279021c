#pragma once

#include <array>
#include <vector>

#include "core/rng.hpp"

namespace bg::env {

//! Domain randomization ranges. Friction, mass and actuator gains are drawn
//! once per environment instance; joint offsets, object position and the
//! disturbance schedule are redrawn at every reset.
struct RandomizationConfig {
  double joint_offset_range = 3.14159265358979323846 / 9.0;  // +-pi/9 rad
  double object_xy_range = 0.03;                             // +-3 cm

  double friction_min = 0.7;
  double friction_max = 1.3;
  double mass_mult_min = 0.3;
  double mass_mult_max = 0.5;
  double p_gain_mult_min = 0.3;   // log-uniform
  double p_gain_mult_max = 3.0;
  double d_gain_mult_min = 0.75;  // log-uniform
  double d_gain_mult_max = 1.5;

  bool disturbance_enabled = true;
  double disturbance_force_range = 0.3;  // each component U(-range, range), N
  double disturbance_duration = 0.5;     // s
  double disturbance_start_max = 10.0;   // window start U(0, max), s

  bool noise_enabled = true;
  double noise_joint_sigma = 0.005;  // rad
  double noise_force_sigma = 0.5;    // N

  void validate() const;  // throws std::invalid_argument
};

//! Values drawn once at environment creation.
struct InstanceDraw {
  double object_static_friction = 1.0;
  double object_dynamic_friction = 1.0;
  double robot_static_friction = 1.0;
  double robot_dynamic_friction = 1.0;
  double mass_multiplier = 1.0;
  double p_gain_multiplier = 1.0;
  double d_gain_multiplier = 1.0;
};

//! Values redrawn at every reset.
struct EpisodeDraw {
  std::array<double, 9> joint_offsets{};
  double object_x = 0.0;
  double object_y = 0.0;
  std::array<double, 3> disturbance_force{};
  double disturbance_start = 0.0;
};

//! Full record of one episode's randomization, kept for reproducibility and
//! stored alongside demonstrations.
struct RandomizationDraw {
  InstanceDraw instance;
  EpisodeDraw episode;
  double noise_joint_sigma = 0.0;
  double noise_force_sigma = 0.0;

  static constexpr int kArraySize = 24;
  std::array<float, kArraySize> to_array() const;
  static RandomizationDraw from_array(const std::array<float, kArraySize>& a);
};

InstanceDraw sample_instance(const RandomizationConfig& cfg, RngStream& rng);
EpisodeDraw sample_episode(const RandomizationConfig& cfg, RngStream& rng);

}  // namespace bg::env
