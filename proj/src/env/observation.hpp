#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "core/rng.hpp"
#include "sim/world.hpp"

namespace bg::env {

enum class NoiseClass { None, JointAngle, Force };

//! One named block of the privileged observation vector.
struct ObsField {
  std::string_view name;
  int width;
  NoiseClass noise;
};

//! Fixed privileged layout; the total dimension is derived from this table.
inline constexpr std::array<ObsField, 13> kPrivilegedLayout{{
    {"joint_positions", 9, NoiseClass::JointAngle},
    {"joint_velocities", 9, NoiseClass::None},
    {"fingertip_positions", 9, NoiseClass::None},
    {"fingertip_orientations", 12, NoiseClass::None},
    {"object_position", 3, NoiseClass::None},
    {"object_orientation", 4, NoiseClass::None},
    {"object_lin_vel", 3, NoiseClass::None},
    {"object_ang_vel", 3, NoiseClass::None},
    {"fingertip_contact_forces_3axis", 9, NoiseClass::Force},
    {"planar_distance", 1, NoiseClass::None},
    {"uniaxial_forces", 3, NoiseClass::Force},
    {"fingertip_wrench_6d", 18, NoiseClass::None},  // force rows get Force noise (see builder)
    {"previous_action", 9, NoiseClass::None},
}};

constexpr int privileged_dim() {
  int d = 0;
  for (const auto& f : kPrivilegedLayout) d += f.width;
  return d;
}

constexpr int partial_dim() { return 12; }

//! Offset of a named field within the privileged vector; -1 if unknown.
constexpr int field_offset(std::string_view name) {
  int off = 0;
  for (const auto& f : kPrivilegedLayout) {
    if (f.name == name) return off;
    off += f.width;
  }
  return -1;
}

struct NoiseModel {
  bool enabled = true;
  double joint_sigma = 0.005;  // rad
  double force_sigma = 0.5;    // N
};

//! Privileged observation for the current world state. noise_rng may be
//! nullptr when noise is disabled.
std::vector<double> build_privileged_obs(const sim::WorldState& world,
                                         const sim::GripperModel& model,
                                         const sim::PhysicsParams& params,
                                         const std::array<double, 9>& previous_action,
                                         const NoiseModel& noise, RngStream* noise_rng);

//! Deployable 12-dim observation: 9 joint angles + 3 uniaxial forces.
std::vector<double> build_partial_obs(const sim::WorldState& world,
                                      const sim::GripperModel& model,
                                      const sim::PhysicsParams& params, const NoiseModel& noise,
                                      RngStream* noise_rng);

//! Indices of the partial observation channels inside the privileged vector.
std::array<int, 12> partial_index_map();

}  // namespace bg::env
