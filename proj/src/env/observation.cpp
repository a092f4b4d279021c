#include "env/observation.hpp"

#include <algorithm>

#include "reward/reward.hpp"

namespace bg::env {

namespace {

//! Per-fingertip contact aggregates in the tip frame.
struct TipContactSummary {
  Vec3 force;   // applied on the object, tip frame
  Vec3 torque;  // about the tip center, tip frame
};

std::array<TipContactSummary, 3> summarize_tip_contacts(
    const sim::WorldState& world, const std::array<sim::FingertipPose, 3>& tips) {
  std::array<TipContactSummary, 3> out{};
  for (const auto& c : world.contacts) {
    if (c.fingertip_index < 0) continue;
    const int f = c.fingertip_index;
    const auto& tip = tips[f];
    out[f].force += tip.orientation.rotate_inv(c.force_world);
    const Vec3 torque_world = cross(c.position - tip.position, c.force_world);
    out[f].torque += tip.orientation.rotate_inv(torque_world);
  }
  return out;
}

}  // namespace

std::vector<double> build_privileged_obs(const sim::WorldState& world,
                                         const sim::GripperModel& model,
                                         const sim::PhysicsParams& params,
                                         const std::array<double, 9>& previous_action,
                                         const NoiseModel& noise, RngStream* noise_rng) {
  std::vector<double> obs;
  obs.reserve(privileged_dim());
  const auto tips = sim::forward_kinematics(world.joint_pos, model);
  const auto tip_sum = summarize_tip_contacts(world, tips);
  const auto uni = sim::uniaxial_forces(world, model, params.uniaxial_threshold);

  const bool noisy = noise.enabled && noise_rng != nullptr;
  const auto jnoise = [&] { return noisy ? noise_rng->normal(0.0, noise.joint_sigma) : 0.0; };
  const auto fnoise = [&] { return noisy ? noise_rng->normal(0.0, noise.force_sigma) : 0.0; };

  for (int j = 0; j < 9; ++j) obs.push_back(world.joint_pos[j] + jnoise());
  for (int j = 0; j < 9; ++j) obs.push_back(world.joint_vel[j]);
  for (int f = 0; f < 3; ++f) {
    obs.push_back(tips[f].position.x);
    obs.push_back(tips[f].position.y);
    obs.push_back(tips[f].position.z);
  }
  for (int f = 0; f < 3; ++f) {
    obs.push_back(tips[f].orientation.w);
    obs.push_back(tips[f].orientation.x);
    obs.push_back(tips[f].orientation.y);
    obs.push_back(tips[f].orientation.z);
  }
  obs.push_back(world.body.position.x);
  obs.push_back(world.body.position.y);
  obs.push_back(world.body.position.z);
  obs.push_back(world.body.orientation.w);
  obs.push_back(world.body.orientation.x);
  obs.push_back(world.body.orientation.y);
  obs.push_back(world.body.orientation.z);
  obs.push_back(world.body.linear_velocity.x);
  obs.push_back(world.body.linear_velocity.y);
  obs.push_back(world.body.linear_velocity.z);
  obs.push_back(world.body.angular_velocity.x);
  obs.push_back(world.body.angular_velocity.y);
  obs.push_back(world.body.angular_velocity.z);
  for (int f = 0; f < 3; ++f) {
    obs.push_back(tip_sum[f].force.x + fnoise());
    obs.push_back(tip_sum[f].force.y + fnoise());
    obs.push_back(tip_sum[f].force.z + fnoise());
  }
  {
    const double object_xy[2] = {world.body.position.x, world.body.position.y};
    const Vec3 c = model.center_xy();
    const double center_xy[2] = {c.x, c.y};
    obs.push_back(reward::planar_distance(object_xy, center_xy));
  }
  for (int f = 0; f < 3; ++f) obs.push_back(std::max(0.0, uni[f] + fnoise()));
  for (int f = 0; f < 3; ++f) {
    obs.push_back(tip_sum[f].force.x + fnoise());
    obs.push_back(tip_sum[f].force.y + fnoise());
    obs.push_back(tip_sum[f].force.z + fnoise());
    obs.push_back(tip_sum[f].torque.x);
    obs.push_back(tip_sum[f].torque.y);
    obs.push_back(tip_sum[f].torque.z);
  }
  for (int j = 0; j < 9; ++j) obs.push_back(previous_action[j]);
  return obs;
}

std::vector<double> build_partial_obs(const sim::WorldState& world,
                                      const sim::GripperModel& model,
                                      const sim::PhysicsParams& params, const NoiseModel& noise,
                                      RngStream* noise_rng) {
  std::vector<double> obs;
  obs.reserve(partial_dim());
  const auto uni = sim::uniaxial_forces(world, model, params.uniaxial_threshold);
  const bool noisy = noise.enabled && noise_rng != nullptr;
  for (int j = 0; j < 9; ++j) {
    obs.push_back(world.joint_pos[j] + (noisy ? noise_rng->normal(0.0, noise.joint_sigma) : 0.0));
  }
  for (int f = 0; f < 3; ++f) {
    const double n = noisy ? noise_rng->normal(0.0, noise.force_sigma) : 0.0;
    obs.push_back(std::max(0.0, uni[f] + n));
  }
  return obs;
}

std::array<int, 12> partial_index_map() {
  std::array<int, 12> map{};
  const int joints = field_offset("joint_positions");
  const int uni = field_offset("uniaxial_forces");
  for (int j = 0; j < 9; ++j) map[j] = joints + j;
  for (int f = 0; f < 3; ++f) map[9 + f] = uni + f;
  return map;
}

}  // namespace bg::env
