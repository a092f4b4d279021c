#pragma once

#include <array>

#include "core/vec3.hpp"

namespace bg::sim {

//! Pose of one fingertip (center of the spherical tip pad).
//! The orientation's local z-axis is the pad pressing direction.
struct FingertipPose {
  Vec3 position;
  Quat orientation;
};

//! Three-fingered gripper hanging from a fixed palm, fingers 120 degrees
//! apart. Each finger is yaw-pitch-pitch: joint 1 swings the finger plane
//! about the vertical, joints 2 and 3 flex it toward the gripper center.
struct GripperModel {
  static constexpr int kFingers = 3;
  static constexpr int kJoints = 9;

  double base_radius = 0.10;    // finger base distance from the center axis
  double palm_height = 0.248;   // finger base height above ground
  double link1 = 0.05;          // vertical segment below the yaw joint
  double link2 = 0.085;
  double link3 = 0.085;
  double fingertip_radius = 0.012;

  std::array<double, kJoints> joint_min{};
  std::array<double, kJoints> joint_max{};

  std::array<double, kJoints> pd_stiffness{};  // N*m/rad, after randomization
  std::array<double, kJoints> pd_damping{};    // N*m*s/rad
  double torque_limit = 1.5;                   // N*m
  double joint_inertia = 2e-3;                 // kg*m^2, lumped (geared servo reflected inertia)

  GripperModel();

  //! Finger base azimuth (rad) about the vertical axis.
  double finger_azimuth(int finger) const;
  //! Finger base point in world frame.
  Vec3 finger_base(int finger) const;
  //! Gripper center on the ground plane (reward/workspace reference).
  Vec3 center_xy() const { return {0, 0, 0}; }

  //! Initial joint configuration: (0, pi/3, 0) per finger.
  std::array<double, kJoints> home_pose() const;

  bool joints_within_limits(const std::array<double, kJoints>& q) const;
};

//! World-frame fingertip poses for all three fingers.
//! Throws std::invalid_argument on non-finite input.
std::array<FingertipPose, 3> forward_kinematics(const std::array<double, 9>& joint_angles,
                                                const GripperModel& model);

//! 3x3 position Jacobian of one fingertip center w.r.t. its finger's joints;
//! columns are d(tip)/d(q1..q3) in world frame.
std::array<Vec3, 3> fingertip_jacobian(const std::array<double, 9>& joint_angles,
                                       const GripperModel& model, int finger);

//! Fingertip linear velocity from joint rates via the Jacobian.
Vec3 fingertip_velocity(const std::array<double, 9>& joint_angles,
                        const std::array<double, 9>& joint_rates,
                        const GripperModel& model, int finger);

//! Per-joint PD torque with saturation: clamp(kp (target - q) - kd qdot).
std::array<double, 9> pd_torque(const std::array<double, 9>& theta,
                                const std::array<double, 9>& theta_dot,
                                const std::array<double, 9>& target_theta,
                                const GripperModel& model);

}  // namespace bg::sim
