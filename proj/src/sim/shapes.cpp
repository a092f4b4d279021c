#include "sim/shapes.hpp"

#include <cmath>
#include <stdexcept>

namespace bg::sim {

namespace {

constexpr double kPi = 3.14159265358979323846;

ShapePrimitive make(ShapeKind kind, const char* id, double a_cm, double b_cm, double c_cm) {
  ShapePrimitive s;
  s.kind = kind;
  s.dims = Vec3{a_cm, b_cm, c_cm} * 0.01;
  s.object_id = id;
  return s;
}

std::vector<ShapePrimitive> build_catalog() {
  std::vector<ShapePrimitive> c;
  // Cuboid A: X = Y, flat; Large/Medium/Small.
  c.push_back(make(ShapeKind::Cuboid, "CuboidA-L", 10.0, 10.0, 7.5));
  c.push_back(make(ShapeKind::Cuboid, "CuboidA-M", 8.0, 8.0, 6.0));
  c.push_back(make(ShapeKind::Cuboid, "CuboidA-S", 6.0, 6.0, 4.5));
  // Cuboid B: tall variant.
  c.push_back(make(ShapeKind::Cuboid, "CuboidB-L", 10.0, 7.5, 10.0));
  c.push_back(make(ShapeKind::Cuboid, "CuboidB-M", 8.0, 6.0, 8.0));
  c.push_back(make(ShapeKind::Cuboid, "CuboidB-S", 6.0, 4.5, 6.0));
  // Capsule: radius, cylindrical height.
  c.push_back(make(ShapeKind::Capsule, "Capsule-L", 3.33, 3.33, 0.0));
  c.push_back(make(ShapeKind::Capsule, "Capsule-M", 2.67, 2.67, 0.0));
  c.push_back(make(ShapeKind::Capsule, "Capsule-S", 2.00, 2.00, 0.0));
  // Cylinder A: slender.
  c.push_back(make(ShapeKind::Cylinder, "CylinderA-L", 3.75, 10.0, 0.0));
  c.push_back(make(ShapeKind::Cylinder, "CylinderA-M", 3.0, 8.0, 0.0));
  c.push_back(make(ShapeKind::Cylinder, "CylinderA-S", 2.25, 6.0, 0.0));
  // Cylinder B: wide.
  c.push_back(make(ShapeKind::Cylinder, "CylinderB-L", 5.0, 7.5, 0.0));
  c.push_back(make(ShapeKind::Cylinder, "CylinderB-M", 4.0, 6.0, 0.0));
  c.push_back(make(ShapeKind::Cylinder, "CylinderB-S", 3.0, 4.5, 0.0));
  // Sphere.
  c.push_back(make(ShapeKind::Sphere, "Sphere-L", 5.0, 0.0, 0.0));
  c.push_back(make(ShapeKind::Sphere, "Sphere-M", 4.0, 0.0, 0.0));
  c.push_back(make(ShapeKind::Sphere, "Sphere-S", 3.0, 0.0, 0.0));
  return c;
}

}  // namespace

double ShapePrimitive::rest_height() const {
  switch (kind) {
    case ShapeKind::Cuboid: return 0.5 * dims.z;
    case ShapeKind::Capsule: return dims.x + 0.5 * dims.y;
    case ShapeKind::Cylinder: return 0.5 * dims.y;
    case ShapeKind::Sphere: return dims.x;
  }
  return 0.0;
}

double ShapePrimitive::volume() const {
  switch (kind) {
    case ShapeKind::Cuboid: return dims.x * dims.y * dims.z;
    case ShapeKind::Capsule: {
      const double r = dims.x, h = dims.y;
      return kPi * r * r * h + (4.0 / 3.0) * kPi * r * r * r;
    }
    case ShapeKind::Cylinder: {
      const double r = dims.x, h = dims.y;
      return kPi * r * r * h;
    }
    case ShapeKind::Sphere: {
      const double r = dims.x;
      return (4.0 / 3.0) * kPi * r * r * r;
    }
  }
  return 0.0;
}

Vec3 ShapePrimitive::principal_inertia(double mass) const {
  switch (kind) {
    case ShapeKind::Cuboid: {
      const double x2 = dims.x * dims.x, y2 = dims.y * dims.y, z2 = dims.z * dims.z;
      return {mass / 12.0 * (y2 + z2), mass / 12.0 * (x2 + z2), mass / 12.0 * (x2 + y2)};
    }
    case ShapeKind::Cylinder: {
      const double r = dims.x, h = dims.y;
      const double ixy = mass * (3 * r * r + h * h) / 12.0;
      return {ixy, ixy, mass * r * r / 2.0};
    }
    case ShapeKind::Sphere: {
      const double i = 0.4 * mass * dims.x * dims.x;
      return {i, i, i};
    }
    case ShapeKind::Capsule: {
      // Composite of a cylinder and two hemispheres about the capsule center.
      const double r = dims.x, h = dims.y;
      const double v_cyl = kPi * r * r * h;
      const double v_hs = (2.0 / 3.0) * kPi * r * r * r;
      const double v = v_cyl + 2 * v_hs;
      const double m_cyl = mass * v_cyl / v;
      const double m_hs = mass * v_hs / v;
      const double iz = m_cyl * r * r / 2.0 + 2 * m_hs * (0.4 * r * r);
      const double d = 0.5 * h + 0.375 * r;  // hemisphere COM offset from capsule center
      double ixy = m_cyl * (3 * r * r + h * h) / 12.0;
      // hemisphere about its own COM: 83/320 m r^2; parallel axis to capsule center.
      ixy += 2 * (m_hs * (83.0 / 320.0) * r * r + m_hs * d * d);
      return {ixy, ixy, iz};
    }
  }
  return {0, 0, 0};
}

double ShapePrimitive::bounding_radius() const {
  switch (kind) {
    case ShapeKind::Cuboid: return 0.5 * norm(dims);
    case ShapeKind::Capsule: return dims.x + 0.5 * dims.y;
    case ShapeKind::Cylinder: return std::sqrt(dims.x * dims.x + 0.25 * dims.y * dims.y);
    case ShapeKind::Sphere: return dims.x;
  }
  return 0.0;
}

const std::vector<ShapePrimitive>& object_catalog() {
  static const std::vector<ShapePrimitive> catalog = build_catalog();
  return catalog;
}

const ShapePrimitive& catalog_entry(const std::string& object_id) {
  for (const auto& s : object_catalog()) {
    if (s.object_id == object_id) return s;
  }
  throw std::invalid_argument("unknown object id: " + object_id);
}

std::vector<std::string> medium_object_ids() {
  std::vector<std::string> ids;
  for (const auto& s : object_catalog()) {
    if (s.object_id.ends_with("-M")) ids.push_back(s.object_id);
  }
  return ids;
}

std::vector<std::string> all_object_ids() {
  std::vector<std::string> ids;
  for (const auto& s : object_catalog()) ids.push_back(s.object_id);
  return ids;
}

std::vector<SupportPoint> support_points(const ShapePrimitive& shape) {
  std::vector<SupportPoint> pts;
  switch (shape.kind) {
    case ShapeKind::Cuboid: {
      const Vec3 h = shape.dims * 0.5;
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          for (int sz : {-1, 1}) pts.push_back({{sx * h.x, sy * h.y, sz * h.z}, 0.0});
      break;
    }
    case ShapeKind::Cylinder: {
      const double r = shape.dims.x, hh = 0.5 * shape.dims.y;
      for (double zs : {-hh, hh}) {
        for (int k = 0; k < 8; ++k) {
          const double a = 2.0 * kPi * k / 8.0;
          pts.push_back({{r * std::cos(a), r * std::sin(a), zs}, 0.0});
        }
      }
      break;
    }
    case ShapeKind::Capsule: {
      const double hh = 0.5 * shape.dims.y;
      pts.push_back({{0, 0, -hh}, shape.dims.x});
      pts.push_back({{0, 0, hh}, shape.dims.x});
      break;
    }
    case ShapeKind::Sphere:
      pts.push_back({{0, 0, 0}, shape.dims.x});
      break;
  }
  return pts;
}

}  // namespace bg::sim
