#pragma once

#include "core/vec3.hpp"
#include "sim/shapes.hpp"

namespace bg::sim {

struct SdfResult {
  double distance;  // negative inside, positive outside
  Vec3 normal;      // unit outward normal in the query frame
};

//! Signed distance of a point in the shape's body frame.
SdfResult signed_distance_local(const ShapePrimitive& shape, const Vec3& point);

//! Signed distance of a world point to a posed shape; world-frame normal.
SdfResult signed_distance(const ShapePrimitive& shape, const Vec3& shape_pos,
                          const Quat& shape_orientation, const Vec3& world_point);

}  // namespace bg::sim
