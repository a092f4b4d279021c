#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sim/sdf.hpp"
#include "sim/world.hpp"

namespace bg::sim {

namespace {

struct FrictionPair {
  double static_mu;
  double dynamic_mu;
};

//! Tangential spring-damper against a stick anchor, Coulomb-clamped.
//! Returns the friction force on the "moving" side and repositions the anchor
//! when the clamp engages (anchor follows so the spring reproduces the
//! clamped force).
Vec3 stick_friction(const Vec3& contact_point, const Vec3& normal, const Vec3& tangent_vel,
                    double normal_force, const FrictionPair& mu, double k_t, double c_t,
                    Vec3& anchor_world, bool& anchor_active) {
  if (!anchor_active) {
    anchor_world = contact_point;
    anchor_active = true;
  }
  Vec3 delta = contact_point - anchor_world;
  delta -= normal * dot(delta, normal);
  Vec3 f = -(delta * k_t) - tangent_vel * c_t;
  f -= normal * dot(f, normal);

  const double f_mag = norm(f);
  const double stick_limit = mu.static_mu * normal_force;
  if (f_mag > stick_limit && f_mag > 1e-12) {
    const double slide_limit = mu.dynamic_mu * normal_force;
    f = f * (slide_limit / f_mag);
    // Slide the anchor to the clamp boundary.
    anchor_world = contact_point + f * (1.0 / k_t);
  }
  return f;
}

double capped_stiffness(double requested, double m_eff, const PhysicsParams& p) {
  const double cap = p.stiffness_cap_factor * m_eff / (p.physics_dt * p.physics_dt);
  return std::min(requested, cap);
}

double capped_damping(double requested, double m_eff, const PhysicsParams& p) {
  const double cap = 0.5 * m_eff / p.physics_dt;
  return std::min(requested, cap);
}

//! Effective mass the contact "sees" at a point offset r from the COM when
//! pushing along n: series combination of translation and rotation.
double point_effective_mass(const RigidBodyState& b, const Vec3& r, const Vec3& n) {
  const Vec3 r_perp = r - n * dot(r, n);
  const double l2 = norm2(r_perp);
  const double i_min = std::min(std::min(b.inertia.x, b.inertia.y), b.inertia.z);
  return 1.0 / (1.0 / b.mass + l2 / i_min);
}

}  // namespace

void PhysicsParams::validate() const {
  if (substeps_per_control < 1) throw std::invalid_argument("substeps_per_control must be >= 1");
  if (std::fabs(physics_dt * substeps_per_control - 0.05) > 1e-9) {
    throw std::invalid_argument("physics_dt * substeps_per_control must equal 1/20 s");
  }
  if (object_dynamic_friction > object_static_friction + 1e-12 ||
      robot_dynamic_friction > robot_static_friction + 1e-12) {
    throw std::invalid_argument("dynamic friction must not exceed static friction");
  }
  if (gravity < 0 || contact_stiffness <= 0 || physics_dt <= 0 || uniaxial_threshold < 0) {
    throw std::invalid_argument("invalid physics parameter");
  }
}

bool WorldState::finite_state() const {
  for (int j = 0; j < 9; ++j) {
    if (!std::isfinite(joint_pos[j]) || !std::isfinite(joint_vel[j]) ||
        !std::isfinite(joint_targets[j]))
      return false;
  }
  return body.finite_state() && std::isfinite(time);
}

ContactResolution resolve_contacts(WorldState& world, const GripperModel& model,
                                   const PhysicsParams& params) {
  ContactResolution out;
  out.object_force = {0, 0, 0};
  out.object_torque = {0, 0, 0};
  out.joint_torque.fill(0.0);
  world.contacts.clear();

  const RigidBodyState& body = world.body;
  const double m_tip =
      model.joint_inertia / ((model.link2 + model.link3) * (model.link2 + model.link3));
  const FrictionPair tip_obj_mu{0.5 * (params.robot_static_friction + params.object_static_friction),
                                0.5 * (params.robot_dynamic_friction + params.object_dynamic_friction)};
  const FrictionPair obj_ground_mu{params.object_static_friction, params.object_dynamic_friction};
  const FrictionPair tip_ground_mu{params.robot_static_friction, params.robot_dynamic_friction};

  const auto tips = forward_kinematics(world.joint_pos, model);

  // Fingertip vs object, fingertip vs ground.
  for (int f = 0; f < 3; ++f) {
    const Vec3 tip_center = tips[f].position;
    const auto jac = fingertip_jacobian(world.joint_pos, model, f);
    Vec3 tip_vel{0, 0, 0};
    for (int j = 0; j < 3; ++j) tip_vel += jac[j] * world.joint_vel[3 * f + j];

    // Object contact.
    const SdfResult sdf = signed_distance(world.object, body.position, body.orientation, tip_center);
    const double gap = sdf.distance - model.fingertip_radius;
    if (gap < 0.0) {
      const double pen = -gap;
      const Vec3 n = sdf.normal;  // outward from object, toward the tip
      const Vec3 p_c = tip_center - n * sdf.distance;
      const Vec3 obj_vel_c = body.linear_velocity + cross(body.angular_velocity, p_c - body.position);
      const Vec3 rel_vel = tip_vel - obj_vel_c;  // tip relative to object
      const double pen_rate = -dot(rel_vel, n);

      const double m_eff = std::min(point_effective_mass(body, p_c - body.position, n), m_tip);
      const double k = capped_stiffness(params.contact_stiffness, m_eff, params);
      const double c = capped_damping(params.contact_damping, m_eff, params);
      const double f_n = k * pen + c * std::max(0.0, pen_rate);

      const Vec3 tangent_vel = rel_vel - n * dot(rel_vel, n);
      Vec3 anchor_world = body.position + body.orientation.rotate(world.tip_object_anchor[f].anchor);
      bool active = world.tip_object_anchor[f].active;
      const Vec3 f_on_tip_t = stick_friction(p_c, n, tangent_vel, f_n, tip_obj_mu, k, c,
                                             anchor_world, active);
      world.tip_object_anchor[f].active = active;
      world.tip_object_anchor[f].anchor = body.orientation.rotate_inv(anchor_world - body.position);

      const Vec3 force_on_tip = n * f_n + f_on_tip_t;
      const Vec3 force_on_obj = -force_on_tip;

      ContactPoint cp;
      cp.fingertip_index = f;
      cp.position = p_c;
      cp.force_world = force_on_obj;
      cp.normal_world = -n;
      cp.penetration = pen;
      world.contacts.push_back(cp);

      out.object_force += force_on_obj;
      out.object_torque += cross(p_c - body.position, force_on_obj);
      for (int j = 0; j < 3; ++j) out.joint_torque[3 * f + j] += dot(jac[j], force_on_tip);
    } else {
      world.tip_object_anchor[f].active = false;
    }

    // Ground contact of the fingertip sphere.
    const double tip_gap = tip_center.z - model.fingertip_radius;
    if (tip_gap < 0.0) {
      const double pen = -tip_gap;
      const Vec3 p_c{tip_center.x, tip_center.y, 0.0};
      const double pen_rate = -tip_vel.z;
      const double k = capped_stiffness(params.contact_stiffness, m_tip, params);
      const double c = capped_damping(params.contact_damping, m_tip, params);
      const double f_n = k * pen + c * std::max(0.0, pen_rate);
      const Vec3 up{0, 0, 1};
      const Vec3 tangent_vel{tip_vel.x, tip_vel.y, 0.0};
      const Vec3 f_t = stick_friction(p_c, up, tangent_vel, f_n, tip_ground_mu, k, c,
                                      world.tip_ground_anchor[f].anchor,
                                      world.tip_ground_anchor[f].active);
      const Vec3 force_on_tip = up * f_n + f_t;
      for (int j = 0; j < 3; ++j) out.joint_torque[3 * f + j] += dot(jac[j], force_on_tip);
    } else {
      world.tip_ground_anchor[f].active = false;
    }
  }

  // Object vs ground through fixed support samples.
  const auto supports = support_points(world.object);
  if (world.ground_anchor.size() != supports.size()) world.ground_anchor.resize(supports.size());
  for (size_t i = 0; i < supports.size(); ++i) {
    const Vec3 p = body.position + body.orientation.rotate(supports[i].local);
    const double low = p.z - supports[i].radius;
    if (low >= 0.0) {
      world.ground_anchor[i].active = false;
      continue;
    }
    const double pen = -low;
    const Vec3 p_c{p.x, p.y, 0.0};
    const Vec3 vel_c = body.linear_velocity + cross(body.angular_velocity, p_c - body.position);
    const double pen_rate = -vel_c.z;
    const double m_eff = point_effective_mass(body, p_c - body.position, {0, 0, 1});
    const double k = capped_stiffness(params.contact_stiffness, m_eff, params);
    const double c = capped_damping(params.contact_damping, m_eff, params);
    const double f_n = k * pen + c * std::max(0.0, pen_rate);
    const Vec3 up{0, 0, 1};
    const Vec3 tangent_vel{vel_c.x, vel_c.y, 0.0};
    const Vec3 f_t = stick_friction(p_c, up, tangent_vel, f_n, obj_ground_mu, k, c,
                                    world.ground_anchor[i].anchor, world.ground_anchor[i].active);
    const Vec3 force_on_obj = up * f_n + f_t;

    ContactPoint cp;
    cp.fingertip_index = ContactPoint::kGround;
    cp.position = p_c;
    cp.force_world = force_on_obj;
    cp.normal_world = up;
    cp.penetration = pen;
    world.contacts.push_back(cp);

    out.object_force += force_on_obj;
    out.object_torque += cross(p_c - body.position, force_on_obj);
  }

  return out;
}

double project_uniaxial(const std::vector<ContactPoint>& contacts, int fingertip_index,
                        const Quat& fingertip_orientation, double threshold) {
  if (threshold < 0) throw std::invalid_argument("uniaxial threshold must be >= 0");
  const Vec3 press_axis = fingertip_orientation.rotate({0, 0, 1});
  double total = 0.0;
  for (const auto& c : contacts) {
    if (c.fingertip_index != fingertip_index) continue;
    // force_world is what the tip applies on the object; its component along
    // the pad axis is what a uniaxial sensor in the pad reads.
    total += std::max(0.0, dot(c.force_world, press_axis));
  }
  if (total < threshold) return 0.0;
  return total;
}

std::array<double, 3> uniaxial_forces(const WorldState& world, const GripperModel& model,
                                      double threshold) {
  const auto tips = forward_kinematics(world.joint_pos, model);
  std::array<double, 3> out{};
  for (int f = 0; f < 3; ++f) {
    out[f] = project_uniaxial(world.contacts, f, tips[f].orientation, threshold);
  }
  return out;
}

}  // namespace bg::sim
