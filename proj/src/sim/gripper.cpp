#include "sim/gripper.hpp"

#include <cmath>
#include <stdexcept>

namespace bg::sim {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

GripperModel::GripperModel() {
  for (int f = 0; f < kFingers; ++f) {
    joint_min[3 * f + 0] = -kPi / 4;  joint_max[3 * f + 0] = kPi / 4;
    joint_min[3 * f + 1] = -kPi / 6;  joint_max[3 * f + 1] = 2 * kPi / 3;
    joint_min[3 * f + 2] = -kPi / 6;  joint_max[3 * f + 2] = 2 * kPi / 3;
  }
  pd_stiffness.fill(3.0);
  pd_damping.fill(0.1);
}

double GripperModel::finger_azimuth(int finger) const {
  return kPi / 2 + finger * (2 * kPi / 3);
}

Vec3 GripperModel::finger_base(int finger) const {
  const double a = finger_azimuth(finger);
  return {base_radius * std::cos(a), base_radius * std::sin(a), palm_height};
}

std::array<double, 9> GripperModel::home_pose() const {
  std::array<double, 9> q{};
  for (int f = 0; f < kFingers; ++f) {
    q[3 * f + 0] = 0.0;
    q[3 * f + 1] = kPi / 3;
    q[3 * f + 2] = 0.0;
  }
  return q;
}

bool GripperModel::joints_within_limits(const std::array<double, 9>& q) const {
  for (int j = 0; j < 9; ++j) {
    if (q[j] < joint_min[j] || q[j] > joint_max[j]) return false;
  }
  return true;
}

std::array<FingertipPose, 3> forward_kinematics(const std::array<double, 9>& joint_angles,
                                                const GripperModel& model) {
  for (double q : joint_angles) {
    if (!std::isfinite(q)) throw std::invalid_argument("forward_kinematics: non-finite joint angle");
  }
  std::array<FingertipPose, 3> tips;
  // Maps the pad frame so that local +z is the pressing direction
  // (120-degree rotation about (1,1,1): x->y->z->x).
  const Quat pad_frame{0.5, 0.5, 0.5, 0.5};
  for (int f = 0; f < 3; ++f) {
    const double q1 = joint_angles[3 * f + 0];
    const double q2 = joint_angles[3 * f + 1];
    const double q3 = joint_angles[3 * f + 2];
    // Yaw of the flexion plane; +x of the yawed frame points toward the axis at q1 = 0.
    const double yaw = model.finger_azimuth(f) + kPi + q1;
    const Vec3 xin{std::cos(yaw), std::sin(yaw), 0.0};
    const Vec3 up{0, 0, 1};

    const Vec3 base = model.finger_base(f);
    const Vec3 elbow = base - Vec3{0, 0, model.link1};
    const auto link_dir = [&](double pitch) {
      return xin * std::sin(pitch) - up * std::cos(pitch);
    };
    const Vec3 knuckle = elbow + link_dir(q2) * model.link2;
    const Vec3 tip = knuckle + link_dir(q2 + q3) * model.link3;

    const Quat q_yaw = Quat::axis_angle({0, 0, 1}, yaw);
    const Quat q_pitch = Quat::axis_angle({0, 1, 0}, -(q2 + q3));
    Quat orientation = q_yaw * q_pitch * pad_frame;
    orientation.normalize();
    tips[f] = {tip, orientation};
  }
  return tips;
}

std::array<Vec3, 3> fingertip_jacobian(const std::array<double, 9>& joint_angles,
                                       const GripperModel& model, int finger) {
  const double q1 = joint_angles[3 * finger + 0];
  const double q2 = joint_angles[3 * finger + 1];
  const double q3 = joint_angles[3 * finger + 2];
  const double yaw = model.finger_azimuth(finger) + kPi + q1;
  const Vec3 xin{std::cos(yaw), std::sin(yaw), 0.0};
  const Vec3 pitch_axis{std::sin(yaw), -std::cos(yaw), 0.0};  // -y of the yawed frame
  const Vec3 up{0, 0, 1};

  const Vec3 base = model.finger_base(finger);
  const Vec3 elbow = base - Vec3{0, 0, model.link1};
  const auto link_dir = [&](double pitch) {
    return xin * std::sin(pitch) - up * std::cos(pitch);
  };
  const Vec3 knuckle = elbow + link_dir(q2) * model.link2;
  const Vec3 tip = knuckle + link_dir(q2 + q3) * model.link3;

  return {cross(up, tip - base), cross(pitch_axis, tip - elbow), cross(pitch_axis, tip - knuckle)};
}

Vec3 fingertip_velocity(const std::array<double, 9>& joint_angles,
                        const std::array<double, 9>& joint_rates,
                        const GripperModel& model, int finger) {
  const auto jac = fingertip_jacobian(joint_angles, model, finger);
  Vec3 v{0, 0, 0};
  for (int j = 0; j < 3; ++j) v += jac[j] * joint_rates[3 * finger + j];
  return v;
}

std::array<double, 9> pd_torque(const std::array<double, 9>& theta,
                                const std::array<double, 9>& theta_dot,
                                const std::array<double, 9>& target_theta,
                                const GripperModel& model) {
  std::array<double, 9> tau{};
  for (int j = 0; j < 9; ++j) {
    const double raw =
        model.pd_stiffness[j] * (target_theta[j] - theta[j]) - model.pd_damping[j] * theta_dot[j];
    tau[j] = std::clamp(raw, -model.torque_limit, model.torque_limit);
  }
  return tau;
}

}  // namespace bg::sim
