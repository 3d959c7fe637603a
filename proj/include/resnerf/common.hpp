// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>

namespace resnerf {

#ifdef RESNERF_REAL64
using Real = double;
#else
using Real = float;
#endif

using Vec3 = Eigen::Matrix<Real, 3, 1>;
using Mat3 = Eigen::Matrix<Real, 3, 3>;
using Mat4 = Eigen::Matrix<Real, 4, 4>;

inline constexpr Real kInf = std::numeric_limits<Real>::infinity();
inline constexpr Real kPi = Real(3.14159265358979323846);

/// Pixel rectangle [x0,x1) x [y0,y1) used to restrict depth evaluation.
struct CropRect {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }
};

/// Axis-aligned box in world units.
struct Aabb {
  Vec3 min = Vec3::Zero();
  Vec3 max = Vec3::Zero();

  Vec3 extent() const { return max - min; }
  Vec3 center() const { return Real(0.5) * (min + max); }

  bool contains(const Vec3& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
           p.y() <= max.y() && p.z() >= min.z() && p.z() <= max.z();
  }

  /// Maps p into [0,1]^3, clamping points outside the box to its faces.
  Vec3 normalize_clamped(const Vec3& p) const {
    Vec3 e = extent();
    Vec3 out;
    for (int a = 0; a < 3; ++a) {
      Real v = e[a] > Real(0) ? (p[a] - min[a]) / e[a] : Real(0);
      out[a] = std::clamp(v, Real(0), Real(1));
    }
    return out;
  }

  Aabb dilated(Real factor) const {
    Vec3 half = Real(0.5) * extent() * factor;
    Vec3 c = center();
    return Aabb{c - Real(0.5) * extent() - half, c + Real(0.5) * extent() + half};
  }

  Aabb merged(const Aabb& other) const {
    return Aabb{min.cwiseMin(other.min), max.cwiseMax(other.max)};
  }

  /// Slab test. Returns the parameter interval where the ray overlaps the box,
  /// clipped to [t0, t1], or nullopt if there is no overlap.
  std::optional<std::pair<Real, Real>> clip_ray(const Vec3& origin, const Vec3& dir,
                                               Real t0, Real t1) const {
    for (int a = 0; a < 3; ++a) {
      Real inv = Real(1) / dir[a];
      Real ta = (min[a] - origin[a]) * inv;
      Real tb = (max[a] - origin[a]) * inv;
      if (inv < Real(0)) std::swap(ta, tb);
      t0 = std::max(t0, ta);
      t1 = std::min(t1, tb);
      if (t0 >= t1) return std::nullopt;
    }
    return std::make_pair(t0, t1);
  }
};

}  // namespace resnerf
