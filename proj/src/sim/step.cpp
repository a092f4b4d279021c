#include <cmath>

#include "sim/world.hpp"

namespace bg::sim {

void step_physics(WorldState& world, const std::array<double, 9>& joint_targets,
                  const GripperModel& model, const PhysicsParams& params,
                  const Vec3& external_force) {
  if (!world.valid) return;
  world.joint_targets = joint_targets;
  const double dt = params.physics_dt;

  for (int sub = 0; sub < params.substeps_per_control; ++sub) {
    const ContactResolution res = resolve_contacts(world, model, params);

    // Joint dynamics: PD torque plus contact reaction on lumped inertia,
    // with inelastic hard stops at the joint limits.
    const auto tau_pd = pd_torque(world.joint_pos, world.joint_vel, world.joint_targets, model);
    for (int j = 0; j < 9; ++j) {
      const double acc = (tau_pd[j] + res.joint_torque[j]) / model.joint_inertia;
      world.joint_vel[j] += acc * dt;
      world.joint_pos[j] += world.joint_vel[j] * dt;
      if (world.joint_pos[j] < model.joint_min[j]) {
        world.joint_pos[j] = model.joint_min[j];
        if (world.joint_vel[j] < 0) world.joint_vel[j] = 0;
      } else if (world.joint_pos[j] > model.joint_max[j]) {
        world.joint_pos[j] = model.joint_max[j];
        if (world.joint_vel[j] > 0) world.joint_vel[j] = 0;
      }
    }

    // Object 6-DoF, semi-implicit Euler.
    RigidBodyState& b = world.body;
    const Vec3 force = res.object_force + external_force + Vec3{0, 0, -params.gravity * b.mass};
    b.linear_velocity += force * (dt / b.mass);
    b.position += b.linear_velocity * dt;

    // Euler equations in the body frame (principal inertia).
    const Vec3 w_b = b.orientation.rotate_inv(b.angular_velocity);
    const Vec3 tau_b = b.orientation.rotate_inv(res.object_torque);
    const Vec3 iw{b.inertia.x * w_b.x, b.inertia.y * w_b.y, b.inertia.z * w_b.z};
    const Vec3 gyro = cross(w_b, iw);
    const Vec3 dw_b{(tau_b.x - gyro.x) / b.inertia.x, (tau_b.y - gyro.y) / b.inertia.y,
                    (tau_b.z - gyro.z) / b.inertia.z};
    b.angular_velocity += b.orientation.rotate(dw_b) * dt;

    const Quat omega_q{0.0, b.angular_velocity.x, b.angular_velocity.y, b.angular_velocity.z};
    const Quat dq = omega_q * b.orientation;
    b.orientation.w += 0.5 * dq.w * dt;
    b.orientation.x += 0.5 * dq.x * dt;
    b.orientation.y += 0.5 * dq.y * dt;
    b.orientation.z += 0.5 * dq.z * dt;
    b.orientation.normalize();

    world.time += dt;
  }

  // Refresh the contact set to match the post-step configuration so
  // observations and rewards see the state they describe.
  resolve_contacts(world, model, params);

  if (!world.finite_state()) world.valid = false;
}

void place_object(WorldState& world, const ShapePrimitive& shape, double x, double y,
                  double mass_multiplier, double density) {
  world.object = shape;
  RigidBodyState& b = world.body;
  b.position = {x, y, shape.rest_height()};
  b.orientation = {1, 0, 0, 0};
  b.linear_velocity = {0, 0, 0};
  b.angular_velocity = {0, 0, 0};
  b.mass = density * shape.volume() * mass_multiplier;
  b.inertia = shape.principal_inertia(b.mass);
  world.contacts.clear();
  for (auto& a : world.tip_object_anchor) a = {};
  for (auto& a : world.tip_ground_anchor) a = {};
  world.ground_anchor.assign(support_points(shape).size(), {});
}

}  // namespace bg::sim
