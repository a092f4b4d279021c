#pragma once

// Surface point-cloud oracle for signed distance checks: |sdf(p)| should match
// the distance from p to a dense sampling of the shape surface.

#include <cmath>
#include <vector>

#include "core/vec3.hpp"
#include "sim/shapes.hpp"

namespace bg::testing {

//! Dense surface samples, target spacing ~1 mm.
inline std::vector<Vec3> sample_surface(const bg::sim::ShapePrimitive& shape, double spacing = 1e-3) {
  using bg::sim::ShapeKind;
  std::vector<Vec3> pts;
  const double pi = 3.14159265358979323846;
  switch (shape.kind) {
    case ShapeKind::Cuboid: {
      const Vec3 h = shape.dims * 0.5;
      const auto grid = [&](int fixed_axis, double fixed_val) {
        const double ua = fixed_axis == 0 ? h.y : h.x;
        const double va = fixed_axis == 2 ? h.y : h.z;
        const int nu = std::max(2, static_cast<int>(2 * ua / spacing));
        const int nv = std::max(2, static_cast<int>(2 * va / spacing));
        for (int i = 0; i <= nu; ++i)
          for (int j = 0; j <= nv; ++j) {
            const double u = -ua + 2 * ua * i / nu;
            const double v = -va + 2 * va * j / nv;
            if (fixed_axis == 0) pts.push_back({fixed_val, u, v});
            else if (fixed_axis == 1) pts.push_back({u, fixed_val, v});
            else pts.push_back({u, v, fixed_val});
          }
      };
      grid(0, h.x); grid(0, -h.x);
      grid(1, h.y); grid(1, -h.y);
      grid(2, h.z); grid(2, -h.z);
      break;
    }
    case ShapeKind::Sphere: {
      const double r = shape.dims.x;
      const int n = std::max(1000, static_cast<int>(4 * pi * r * r / (spacing * spacing)));
      for (int i = 0; i < n; ++i) {
        // Fibonacci sphere.
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = i * 2.399963229728653;
        pts.push_back({r * rho * std::cos(phi), r * rho * std::sin(phi), r * z});
      }
      break;
    }
    case ShapeKind::Cylinder: {
      const double r = shape.dims.x, hh = 0.5 * shape.dims.y;
      const int na = std::max(16, static_cast<int>(2 * pi * r / spacing));
      const int nz = std::max(2, static_cast<int>(2 * hh / spacing));
      for (int i = 0; i < na; ++i) {
        const double a = 2 * pi * i / na;
        for (int j = 0; j <= nz; ++j) {
          pts.push_back({r * std::cos(a), r * std::sin(a), -hh + 2 * hh * j / nz});
        }
      }
      const int nr = std::max(2, static_cast<int>(r / spacing));
      for (int k = 0; k <= nr; ++k) {
        const double rr = r * k / nr;
        const int nak = std::max(8, static_cast<int>(2 * pi * rr / spacing));
        for (int i = 0; i < nak; ++i) {
          const double a = 2 * pi * i / nak;
          pts.push_back({rr * std::cos(a), rr * std::sin(a), hh});
          pts.push_back({rr * std::cos(a), rr * std::sin(a), -hh});
        }
      }
      break;
    }
    case ShapeKind::Capsule: {
      const double r = shape.dims.x, hh = 0.5 * shape.dims.y;
      const int na = std::max(16, static_cast<int>(2 * pi * r / spacing));
      const int nz = std::max(2, static_cast<int>(2 * hh / spacing));
      for (int i = 0; i < na; ++i) {
        const double a = 2 * pi * i / na;
        for (int j = 0; j <= nz; ++j) {
          pts.push_back({r * std::cos(a), r * std::sin(a), -hh + 2 * hh * j / nz});
        }
      }
      const int n = std::max(500, static_cast<int>(4 * pi * r * r / (spacing * spacing)));
      for (int i = 0; i < n; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / n;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = i * 2.399963229728653;
        const Vec3 s{r * rho * std::cos(phi), r * rho * std::sin(phi), r * z};
        pts.push_back({s.x, s.y, s.z + (s.z >= 0 ? hh : -hh)});
      }
      break;
    }
  }
  return pts;
}

inline double distance_to_cloud(const std::vector<Vec3>& cloud, const Vec3& p) {
  double best = 1e300;
  for (const auto& s : cloud) {
    const double d2 = norm2(s - p);
    if (d2 < best) best = d2;
  }
  return std::sqrt(best);
}

}  // namespace bg::testing
