#pragma once

#include <array>
#include <string>
#include <vector>

#include "core/vec3.hpp"

namespace bg::sim {

enum class ShapeKind { Cuboid, Capsule, Cylinder, Sphere };

//! One analytic collision shape from the object set.
//! dims meaning: Cuboid = full extents (x, y, z); Capsule/Cylinder = (radius,
//! height, 0) where height is the cylindrical section; Sphere = (radius, 0, 0).
struct ShapePrimitive {
  ShapeKind kind = ShapeKind::Sphere;
  Vec3 dims{0.04, 0, 0};
  std::string object_id;

  //! Height of the center above ground when resting upright.
  double rest_height() const;
  //! Volume in m^3.
  double volume() const;
  //! Principal inertia moments for the given mass, diagonal in body frame.
  Vec3 principal_inertia(double mass) const;
  //! Radius of a sphere that encloses the shape (centered at its origin).
  double bounding_radius() const;
};

//! The 18-entry object catalog (6 geometries x 3 sizes), dims in meters.
const std::vector<ShapePrimitive>& object_catalog();

//! Looks up a catalog entry by id ("CuboidA-M", "Sphere-S", ...); throws
//! std::invalid_argument for unknown ids.
const ShapePrimitive& catalog_entry(const std::string& object_id);

//! Ids of the medium-size entries, used as the in-distribution evaluation set.
std::vector<std::string> medium_object_ids();

//! All 18 catalog ids in catalog order.
std::vector<std::string> all_object_ids();

//! Fixed surface sample points used for ground-plane support contacts.
//! Each sample is a point in the body frame plus a spherical pad radius
//! (zero for box corners). Sample count is small and shape-dependent.
struct SupportPoint {
  Vec3 local;
  double radius;
};
std::vector<SupportPoint> support_points(const ShapePrimitive& shape);

}  // namespace bg::sim
