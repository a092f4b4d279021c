#include "sim/sdf.hpp"

#include <algorithm>
#include <cmath>

namespace bg::sim {

namespace {

SdfResult sdf_sphere(double r, const Vec3& p) {
  const double d = norm(p);
  if (d < 1e-12) return {-r, {0, 0, 1}};
  return {d - r, p / d};
}

SdfResult sdf_box(const Vec3& half, const Vec3& p) {
  const Vec3 a{std::fabs(p.x), std::fabs(p.y), std::fabs(p.z)};
  const Vec3 q = a - half;
  if (q.x > 0.0 || q.y > 0.0 || q.z > 0.0) {
    // Outside: distance to the box surface, normal along the gradient.
    const Vec3 qp{std::max(q.x, 0.0), std::max(q.y, 0.0), std::max(q.z, 0.0)};
    const double d = norm(qp);
    Vec3 n = qp / d;
    n.x *= (p.x < 0 ? -1.0 : 1.0);
    n.y *= (p.y < 0 ? -1.0 : 1.0);
    n.z *= (p.z < 0 ? -1.0 : 1.0);
    return {d, n};
  }
  // Inside: nearest face.
  int axis = 0;
  double best = q.x;
  if (q.y > best) { best = q.y; axis = 1; }
  if (q.z > best) { best = q.z; axis = 2; }
  Vec3 n{0, 0, 0};
  const double sign = (axis == 0 ? p.x : axis == 1 ? p.y : p.z) < 0 ? -1.0 : 1.0;
  if (axis == 0) n.x = sign;
  else if (axis == 1) n.y = sign;
  else n.z = sign;
  return {best, n};
}

SdfResult sdf_capsule(double r, double h, const Vec3& p) {
  // Segment from (0,0,-h/2) to (0,0,h/2).
  const double hh = 0.5 * h;
  const double zc = std::clamp(p.z, -hh, hh);
  const Vec3 to_axis{p.x, p.y, p.z - zc};
  const double d = norm(to_axis);
  if (d < 1e-12) return {-r, {0, 0, 1}};
  return {d - r, to_axis / d};
}

SdfResult sdf_cylinder(double r, double h, const Vec3& p) {
  const double hh = 0.5 * h;
  const double dr = std::sqrt(p.x * p.x + p.y * p.y);
  const double qx = dr - r;       // radial distance to the lateral surface
  const double qz = std::fabs(p.z) - hh;  // axial distance to the caps
  const Vec3 radial_dir = dr > 1e-12 ? Vec3{p.x / dr, p.y / dr, 0.0} : Vec3{1, 0, 0};
  const Vec3 cap_dir{0, 0, p.z < 0 ? -1.0 : 1.0};

  if (qx <= 0.0 && qz <= 0.0) {
    // Inside: nearest of lateral surface and caps.
    if (qx > qz) return {qx, radial_dir};
    return {qz, cap_dir};
  }
  if (qx > 0.0 && qz > 0.0) {
    // Outside the rim edge.
    const double d = std::sqrt(qx * qx + qz * qz);
    Vec3 n = radial_dir * (qx / d) + cap_dir * (qz / d);
    return {d, n};
  }
  if (qx > 0.0) return {qx, radial_dir};
  return {qz, cap_dir};
}

}  // namespace

SdfResult signed_distance_local(const ShapePrimitive& shape, const Vec3& point) {
  switch (shape.kind) {
    case ShapeKind::Sphere: return sdf_sphere(shape.dims.x, point);
    case ShapeKind::Cuboid: return sdf_box(shape.dims * 0.5, point);
    case ShapeKind::Capsule: return sdf_capsule(shape.dims.x, shape.dims.y, point);
    case ShapeKind::Cylinder: return sdf_cylinder(shape.dims.x, shape.dims.y, point);
  }
  return {0.0, {0, 0, 1}};
}

SdfResult signed_distance(const ShapePrimitive& shape, const Vec3& shape_pos,
                          const Quat& shape_orientation, const Vec3& world_point) {
  const Vec3 local = shape_orientation.rotate_inv(world_point - shape_pos);
  SdfResult r = signed_distance_local(shape, local);
  r.normal = shape_orientation.rotate(r.normal);
  return r;
}

}  // namespace bg::sim
