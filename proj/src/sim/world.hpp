#pragma once

#include <array>
#include <vector>

#include "core/vec3.hpp"
#include "sim/gripper.hpp"
#include "sim/shapes.hpp"

namespace bg::sim {

//! Free rigid body: object pose, twist and mass properties.
struct RigidBodyState {
  Vec3 position;
  Quat orientation;
  Vec3 linear_velocity;
  Vec3 angular_velocity;
  double mass = 0.1;
  Vec3 inertia{1e-4, 1e-4, 1e-4};  // principal moments, body frame

  bool finite_state() const {
    return finite(position) && orientation.finite() && finite(linear_velocity) &&
           finite(angular_velocity);
  }
};

//! One resolved contact acting on the object.
//! force_world is the force applied to the object; normal_world is the unit
//! direction the other body pushes along (force_world . normal_world >= 0).
struct ContactPoint {
  static constexpr int kGround = -1;
  int fingertip_index = kGround;  // 0..2, or kGround
  Vec3 position;                  // world contact point
  Vec3 force_world;
  Vec3 normal_world;
  double penetration = 0.0;
};

//! Tangential stick state for one persistent contact feature.
struct StictionAnchor {
  bool active = false;
  Vec3 anchor;  // object-frame for tip contacts, world-frame for ground
};

struct PhysicsParams {
  double gravity = 9.81;
  double contact_stiffness = 5000.0;  // N/m (capped per contact for stability)
  double contact_damping = 50.0;      // N*s/m
  double physics_dt = 1.0 / 240.0;
  int substeps_per_control = 12;
  double object_static_friction = 1.0;
  double object_dynamic_friction = 1.0;
  double robot_static_friction = 1.0;
  double robot_dynamic_friction = 1.0;
  double uniaxial_threshold = 0.1;  // N
  //! Per-contact stiffness cap factor s in k <= s * m_eff / dt^2.
  double stiffness_cap_factor = 0.25;

  double control_dt() const { return physics_dt * substeps_per_control; }
  //! Throws std::invalid_argument when the 20 Hz contract or friction
  //! ordering is violated.
  void validate() const;
};

//! Full simulator truth for one gripper-plus-object world.
struct WorldState {
  std::array<double, 9> joint_pos{};
  std::array<double, 9> joint_vel{};
  std::array<double, 9> joint_targets{};

  ShapePrimitive object;
  RigidBodyState body;

  std::vector<ContactPoint> contacts;  // object contacts from the last substep
  double time = 0.0;
  bool valid = true;

  // Persistent friction state (deterministic, part of the world).
  std::array<StictionAnchor, 3> tip_object_anchor;
  std::array<StictionAnchor, 3> tip_ground_anchor;
  std::vector<StictionAnchor> ground_anchor;  // per support point

  bool finite_state() const;
};

//! Net effect of one contact resolution pass.
struct ContactResolution {
  Vec3 object_force;                   // accumulated contact force on the object
  Vec3 object_torque;                  // about the object COM
  std::array<double, 9> joint_torque;  // reaction torques on the finger joints
};

//! Penalty contact resolution for the current world configuration:
//! fingertip-object, fingertip-ground and object-ground contacts.
//! Rewrites world.contacts and updates stiction anchors.
ContactResolution resolve_contacts(WorldState& world, const GripperModel& model,
                                   const PhysicsParams& params);

//! Uniaxial sensor reading: positive part of the applied contact force
//! projected on the pad pressing axis, summed, then thresholded.
double project_uniaxial(const std::vector<ContactPoint>& contacts, int fingertip_index,
                        const Quat& fingertip_orientation, double threshold);

//! Convenience: all three uniaxial readings for the current world contact set.
std::array<double, 3> uniaxial_forces(const WorldState& world, const GripperModel& model,
                                      double threshold);

//! Advances one control period (substeps_per_control semi-implicit Euler
//! substeps) under PD joint control and penalty contacts. external_force is
//! applied at the object COM for the whole period (scheduled disturbance).
//! Marks the world invalid on numerical blow-up instead of throwing.
void step_physics(WorldState& world, const std::array<double, 9>& joint_targets,
                  const GripperModel& model, const PhysicsParams& params,
                  const Vec3& external_force = {0, 0, 0});

//! Places the object resting on the ground at the given xy, identity yaw,
//! and resets contact state.
void place_object(WorldState& world, const ShapePrimitive& shape, double x, double y,
                  double mass_multiplier = 1.0, double density = 300.0);

}  // namespace bg::sim
