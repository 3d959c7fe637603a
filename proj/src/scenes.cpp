// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "resnerf/errors.hpp"

namespace resnerf {

namespace {

constexpr Real kTraceEps = Real(1e-4);
constexpr Real kSpecularExponent = 64;
constexpr int kMaxEvents = 8;

bool intersect_plane(const Vec3& o, const Vec3& d, const Primitive& p, Real t_min,
                     Real& t_out, Vec3& n_out) {
  Real denom = p.normal.dot(d);
  if (std::abs(denom) < Real(1e-9)) return false;
  Real t = (p.offset - p.normal.dot(o)) / denom;
  if (t <= t_min) return false;
  t_out = t;
  n_out = denom < 0 ? p.normal : Vec3(-p.normal);
  return true;
}

bool intersect_box(const Vec3& o, const Vec3& d, const Primitive& p, Real t_min,
                   Real& t_out, Vec3& n_out) {
  Real t_enter = -kInf, t_exit = kInf;
  int axis_enter = 0, axis_exit = 0;
  for (int a = 0; a < 3; ++a) {
    Real lo = p.center[a] - p.half[a];
    Real hi = p.center[a] + p.half[a];
    if (d[a] == Real(0)) {
      if (o[a] < lo || o[a] > hi) return false;
      continue;
    }
    Real inv = Real(1) / d[a];
    Real ta = (lo - o[a]) * inv;
    Real tb = (hi - o[a]) * inv;
    if (ta > tb) std::swap(ta, tb);
    if (ta > t_enter) {
      t_enter = ta;
      axis_enter = a;
    }
    if (tb < t_exit) {
      t_exit = tb;
      axis_exit = a;
    }
  }
  if (t_enter > t_exit) return false;
  int axis;
  if (t_enter > t_min) {
    t_out = t_enter;
    axis = axis_enter;
  } else if (t_exit > t_min) {
    t_out = t_exit;
    axis = axis_exit;
  } else {
    return false;
  }
  n_out = Vec3::Zero();
  n_out[axis] = d[axis] > 0 ? Real(-1) : Real(1);
  return true;
}

bool intersect_sphere(const Vec3& o, const Vec3& d, const Primitive& p, Real t_min,
                      Real& t_out, Vec3& n_out) {
  Vec3 oc = o - p.center;
  Real b = oc.dot(d);
  Real c = oc.squaredNorm() - p.radius * p.radius;
  Real disc = b * b - c;
  if (disc < 0) return false;
  Real s = std::sqrt(disc);
  Real t = -b - s;
  if (t <= t_min) {
    t = -b + s;
    if (t <= t_min) return false;
  }
  t_out = t;
  Vec3 n = (o + t * d - p.center) / p.radius;
  n_out = n.dot(d) > 0 ? Vec3(-n) : n;
  return true;
}

Vec3 surface_albedo(const Material& m, const Vec3& p) {
  if (m.checker_scale <= 0) return m.albedo;
  // Half-cell phase keeps lattice boundaries off z = 0, where the tabletop
  // sits, so hit-point jitter cannot flip the parity.
  auto cell = [&](Real v) {
    return static_cast<long long>(std::floor(v / m.checker_scale + Real(0.5)));
  };
  long long s = cell(p.x()) + cell(p.y()) + cell(p.z());
  return ((s % 2 + 2) % 2) == 0 ? m.albedo : m.albedo_alt;
}

Vec3 specular_lobe(const SceneSpec& spec, const Material& m, const Vec3& n, const Vec3& view) {
  if (m.specular <= 0) return Vec3::Zero();
  Vec3 sum = Vec3::Zero();
  for (const DirectionalLight& light : spec.lights) {
    Vec3 l = light.to_light.normalized();
    Vec3 h = (l + view).normalized();
    Real ndh = n.dot(h);
    if (ndh > 0) sum += std::pow(ndh, kSpecularExponent) * light.intensity;
  }
  return m.specular * sum;
}

Vec3 shade_opaque(const SceneSpec& spec, const Material& m, const Vec3& p, const Vec3& n,
                  const Vec3& view) {
  Vec3 light = Vec3::Constant(spec.ambient);
  for (const DirectionalLight& l : spec.lights) {
    Real ndl = n.dot(l.to_light.normalized());
    if (ndl > 0) light += ndl * l.intensity;
  }
  return surface_albedo(m, p).cwiseProduct(light) + specular_lobe(spec, m, n, view);
}

Vec3 clamp01(const Vec3& c) {
  return Vec3(std::clamp(c.x(), Real(0), Real(1)), std::clamp(c.y(), Real(0), Real(1)),
              std::clamp(c.z(), Real(0), Real(1)));
}

Real max_corner_norm(const Aabb& box) {
  Real best = 0;
  for (int i = 0; i < 8; ++i) {
    Vec3 c((i & 1) ? box.max.x() : box.min.x(), (i & 2) ? box.max.y() : box.min.y(),
           (i & 4) ? box.max.z() : box.min.z());
    best = std::max(best, c.norm());
  }
  return best;
}

}  // namespace

Primitive Primitive::plane(const Vec3& normal, Real offset, Material m) {
  Primitive p;
  p.kind = Kind::kPlane;
  p.normal = normal.normalized();
  p.offset = offset;
  p.material = std::move(m);
  return p;
}

Primitive Primitive::box(const Vec3& center, const Vec3& half, Material m) {
  Primitive p;
  p.kind = Kind::kBox;
  p.center = center;
  p.half = half;
  p.material = std::move(m);
  return p;
}

Primitive Primitive::sphere(const Vec3& center, Real radius, Material m) {
  Primitive p;
  p.kind = Kind::kSphere;
  p.center = center;
  p.radius = radius;
  p.material = std::move(m);
  return p;
}

Aabb Primitive::bounds() const {
  switch (kind) {
    case Kind::kBox:
      return Aabb{center - half, center + half};
    case Kind::kSphere:
      return Aabb{center - Vec3::Constant(radius), center + Vec3::Constant(radius)};
    case Kind::kPlane:
      break;
  }
  throw ConfigError("scenes: a plane has no finite bounds");
}

void SceneSpec::validate() const {
  if (primitives.empty()) throw ConfigError("scene '" + name + "': no primitives");
  bool any_opaque = false;
  for (const Primitive& p : primitives) {
    if (!p.material.transmissive) any_opaque = true;
    if (p.kind == Primitive::Kind::kBox && p.half.minCoeff() <= 0) {
      throw ConfigError("scene '" + name + "': box with non-positive extent");
    }
    if (p.kind == Primitive::Kind::kSphere && p.radius <= 0) {
      throw ConfigError("scene '" + name + "': sphere with non-positive radius");
    }
    if (p.material.transmissive) {
      const Vec3& a = p.material.attenuation;
      if (a.minCoeff() <= 0 || a.maxCoeff() > 1) {
        throw ConfigError("scene '" + name + "': attenuation must lie in (0, 1]");
      }
    }
  }
  if (!any_opaque) throw ConfigError("scene '" + name + "': needs at least one opaque primitive");
  for (const DirectionalLight& l : lights) {
    if (l.to_light.norm() < Real(1e-9)) {
      throw ConfigError("scene '" + name + "': degenerate light direction");
    }
  }
  if (ambient < 0) throw ConfigError("scene '" + name + "': negative ambient");
}

Hit intersect_scene(const SceneSpec& spec, const Vec3& origin, const Vec3& dir, Real t_min) {
  Hit best;
  for (const Primitive& p : spec.primitives) {
    Real t;
    Vec3 n;
    bool ok = false;
    switch (p.kind) {
      case Primitive::Kind::kPlane:
        ok = intersect_plane(origin, dir, p, t_min, t, n);
        break;
      case Primitive::Kind::kBox:
        ok = intersect_box(origin, dir, p, t_min, t, n);
        break;
      case Primitive::Kind::kSphere:
        ok = intersect_sphere(origin, dir, p, t_min, t, n);
        break;
    }
    if (ok && t < best.t) {
      best.t = t;
      best.normal = n;
      best.prim = &p;
    }
  }
  if (best.valid()) best.point = origin + best.t * dir;
  return best;
}

TraceResult trace_ray(const SceneSpec& spec, const Vec3& origin, const Vec3& dir) {
  Vec3 d = dir.normalized();
  Vec3 o = origin;
  Vec3 color = Vec3::Zero();
  Vec3 throughput = Vec3::Ones();
  Real depth = kInf;
  Real travelled = 0;
  for (int event = 0;; ++event) {
    if (event >= kMaxEvents) {
      color += throughput.cwiseProduct(spec.background_color);
      break;
    }
    Hit h = intersect_scene(spec, o, d, kTraceEps);
    if (!h.valid()) {
      color += throughput.cwiseProduct(spec.background_color);
      break;
    }
    if (depth == kInf) depth = travelled + h.t;
    const Material& m = h.prim->material;
    Vec3 view = -d;
    if (!m.transmissive) {
      color += throughput.cwiseProduct(shade_opaque(spec, m, h.point, h.normal, view));
      break;
    }
    color += throughput.cwiseProduct(specular_lobe(spec, m, h.normal, view));
    throughput = throughput.cwiseProduct(m.attenuation);
    travelled += h.t;
    o = h.point;
  }
  return TraceResult{clamp01(color), depth};
}

void raytrace_frame(const SceneSpec& spec, CameraFrame& frame) {
  if (frame.width <= 0 || frame.height <= 0) {
    throw ConfigError("raytrace_frame: frame size unset");
  }
  std::vector<Ray> rays = generate_rays(frame, Real(0), Real(1));
  const std::size_t n = rays.size();
  frame.image.assign(n * 3, 0);
  frame.gt_depth.assign(n, kInf);
  for (std::size_t i = 0; i < n; ++i) {
    TraceResult r = trace_ray(spec, rays[i].origin, rays[i].direction);
    for (int c = 0; c < 3; ++c) {
      frame.image[i * 3 + c] =
          static_cast<std::uint8_t>(std::lround(r.color[c] * Real(255)));
    }
    frame.gt_depth[i] = r.depth;
  }
}

Mat4 look_at_origin(const Vec3& position) {
  if (position.norm() < Real(1e-9)) {
    throw ConfigError("look_at_origin: camera at the origin");
  }
  Vec3 z = position.normalized();
  Vec3 up = Vec3::UnitZ();
  Vec3 x = up.cross(z);
  if (x.norm() < Real(1e-6)) {
    up = Vec3::UnitY();
    x = up.cross(z);
  }
  x.normalize();
  Vec3 y = z.cross(x);
  Mat4 m = Mat4::Identity();
  m.block<3, 1>(0, 0) = x;
  m.block<3, 1>(0, 1) = y;
  m.block<3, 1>(0, 2) = z;
  m.block<3, 1>(0, 3) = position;
  return m;
}

std::vector<Mat4> hemisphere_poses(int n, Real radius, RngStream& rng) {
  if (n < 1) throw ConfigError("hemisphere_poses: n must be >= 1");
  if (!(radius > 0)) throw ConfigError("hemisphere_poses: radius must be > 0");
  // Uniform in z over an elevation band; the poles are excluded so the up
  // reference never degenerates and the table is always in view.
  const Real z_lo = std::sin(Real(10) * kPi / 180);
  const Real z_hi = std::sin(Real(85) * kPi / 180);
  std::vector<Mat4> poses;
  poses.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Real z = z_lo + (z_hi - z_lo) * rng.uniform();
    Real phi = rng.uniform() * 2 * kPi;
    Real r_xy = std::sqrt(std::max(Real(0), 1 - z * z));
    Vec3 pos = radius * Vec3(r_xy * std::cos(phi), r_xy * std::sin(phi), z);
    poses.push_back(look_at_origin(pos));
  }
  return poses;
}

namespace {

Material opaque(const Vec3& albedo, Real specular = 0) {
  Material m;
  m.albedo = albedo;
  m.specular = specular;
  return m;
}

Material glassy(const Vec3& attenuation, Real specular) {
  Material m;
  m.transmissive = true;
  m.attenuation = attenuation;
  m.specular = specular;
  return m;
}

SceneSpec desk_base(std::string name) {
  SceneSpec s;
  s.name = std::move(name);
  s.scene_box = Aabb{Vec3(Real(-1.15), Real(-1.15), Real(-0.2)),
                     Vec3(Real(1.15), Real(1.15), Real(1.15))};
  s.background_color = Vec3::Ones();
  s.ambient = Real(0.28);
  s.lights.push_back(DirectionalLight{Vec3(Real(0.5), Real(-0.3), Real(0.8)).normalized(),
                                      Vec3(Real(0.85), Real(0.83), Real(0.80))});
  s.lights.push_back(DirectionalLight{Vec3(Real(-0.6), Real(0.4), Real(0.55)).normalized(),
                                      Vec3(Real(0.35), Real(0.37), Real(0.42))});
  Material table;
  table.albedo = Vec3(Real(0.62), Real(0.58), Real(0.54));
  table.albedo_alt = Vec3(Real(0.35), Real(0.33), Real(0.31));
  table.checker_scale = Real(0.35);
  s.primitives.push_back(Primitive::box(Vec3(0, 0, Real(-0.08)),
                                        Vec3(Real(1.05), Real(1.05), Real(0.08)), table));
  return s;
}

Aabb added_bounds(const SceneSpec& background, const SceneSpec& eval) {
  Aabb bb = eval.primitives.at(background.primitives.size()).bounds();
  for (std::size_t i = background.primitives.size() + 1; i < eval.primitives.size(); ++i) {
    bb = bb.merged(eval.primitives[i].bounds());
  }
  return bb;
}

}  // namespace

BuiltinScene builtin_scene(std::string_view name) {
  BuiltinScene out;
  if (name == "A") {
    SceneSpec bg = desk_base("A-background");
    bg.primitives.push_back(Primitive::box(Vec3(Real(-0.45), Real(0.3), Real(0.14)),
                                           Vec3(Real(0.16), Real(0.12), Real(0.14)),
                                           opaque(Vec3(Real(0.68), Real(0.21), Real(0.18)))));
    bg.primitives.push_back(Primitive::box(Vec3(Real(0.42), Real(-0.38), Real(0.1)),
                                           Vec3(Real(0.2), Real(0.14), Real(0.1)),
                                           opaque(Vec3(Real(0.2), Real(0.32), Real(0.66)))));
    bg.primitives.push_back(
        Primitive::sphere(Vec3(Real(0.05), Real(0.5), Real(0.17)), Real(0.17),
                          opaque(Vec3(Real(0.24), Real(0.55), Real(0.28)), Real(0.25))));
    SceneSpec ev = bg;
    ev.name = "A";
    // Capsule stand-in: box body with a spherical cap, bottom sunk slightly
    // into the table so no face is coplanar with the tabletop.
    Material glass = glassy(Vec3(Real(0.82), Real(0.86), Real(0.88)), Real(0.4));
    ev.primitives.push_back(Primitive::box(Vec3(0, Real(-0.05), Real(0.29)),
                                           Vec3(Real(0.11), Real(0.11), Real(0.31)), glass));
    ev.primitives.push_back(
        Primitive::sphere(Vec3(0, Real(-0.05), Real(0.60)), Real(0.11), glass));
    out = BuiltinScene{std::move(bg), std::move(ev), Aabb{}};
  } else if (name == "B") {
    SceneSpec bg = desk_base("B-background");
    bg.primitives.push_back(Primitive::box(Vec3(Real(-0.5), Real(-0.35), Real(0.12)),
                                           Vec3(Real(0.18), Real(0.13), Real(0.12)),
                                           opaque(Vec3(Real(0.72), Real(0.5), Real(0.2)))));
    bg.primitives.push_back(Primitive::box(Vec3(Real(0.48), Real(0.3), Real(0.16)),
                                           Vec3(Real(0.13), Real(0.17), Real(0.16)),
                                           opaque(Vec3(Real(0.3), Real(0.3), Real(0.34)))));
    bg.primitives.push_back(
        Primitive::sphere(Vec3(Real(-0.1), Real(0.45), Real(0.15)), Real(0.15),
                          opaque(Vec3(Real(0.5), Real(0.26), Real(0.55)), Real(0.3))));
    SceneSpec ev = bg;
    ev.name = "B";
    ev.primitives.push_back(
        Primitive::sphere(Vec3(Real(0.1), Real(-0.05), Real(0.24)), Real(0.26),
                          glassy(Vec3(Real(0.85), Real(0.88), Real(0.90)), Real(0.35))));
    out = BuiltinScene{std::move(bg), std::move(ev), Aabb{}};
  } else if (name == "C") {
    SceneSpec bg = desk_base("C-background");
    bg.primitives.push_back(Primitive::box(Vec3(Real(-0.45), Real(0.35), Real(0.13)),
                                           Vec3(Real(0.17), Real(0.12), Real(0.13)),
                                           opaque(Vec3(Real(0.21), Real(0.52), Real(0.5)))));
    bg.primitives.push_back(
        Primitive::sphere(Vec3(Real(0.45), Real(-0.3), Real(0.14)), Real(0.14),
                          opaque(Vec3(Real(0.78), Real(0.66), Real(0.2)), Real(0.2))));
    bg.primitives.push_back(
        Primitive::box(Vec3(Real(-0.4), Real(-0.4), Real(0.15)),
                       Vec3(Real(0.12), Real(0.12), Real(0.17)),
                       glassy(Vec3(Real(0.80), Real(0.84), Real(0.87)), Real(0.3))));
    SceneSpec ev = bg;
    ev.name = "C";
    ev.primitives.push_back(
        Primitive::sphere(Vec3(Real(0.25), Real(0.2), Real(0.20)), Real(0.22),
                          glassy(Vec3(Real(0.86), Real(0.88), Real(0.90)), Real(0.35))));
    out = BuiltinScene{std::move(bg), std::move(ev), Aabb{}};
  } else {
    throw ConfigError("builtin_scene: unknown scene '" + std::string(name) +
                      "' (expected A, B, or C)");
  }
  out.added_bbox = added_bounds(out.background, out.eval);
  return out;
}

Dataset render_scene_dataset(const SceneSpec& background_spec, const SceneSpec& eval_spec,
                             const GenerateCounts& counts, std::uint64_t seed) {
  background_spec.validate();
  eval_spec.validate();
  if (eval_spec.primitives.size() < background_spec.primitives.size()) {
    throw ConfigError("generate_dataset: eval spec must extend the background spec");
  }
  if (counts.background_frames < 1 || counts.eval_frames < 1) {
    throw ConfigError("generate_dataset: frame counts must be >= 1");
  }
  if (counts.width < 1 || counts.height < 1) {
    throw ConfigError("generate_dataset: image size must be >= 1");
  }

  Dataset ds;
  ds.meta.scene_name = eval_spec.name;
  ds.meta.scene_box = eval_spec.scene_box;
  ds.meta.background_color = eval_spec.background_color;
  ds.meta.white_background = (eval_spec.background_color - Vec3::Ones()).norm() < Real(1e-6);
  Real reach = max_corner_norm(eval_spec.scene_box);
  if (counts.camera_radius + reach > ds.meta.t_far ||
      counts.camera_radius - reach < ds.meta.t_near) {
    throw ConfigError("generate_dataset: camera radius puts the scene outside [t_near, t_far]");
  }
  if (eval_spec.primitives.size() > background_spec.primitives.size()) {
    ds.meta.added_bbox = added_bounds(background_spec, eval_spec);
  }

  auto make_split = [&](const SceneSpec& spec, int count, const char* stream,
                        const char* prefix) {
    RngStream rng(seed, stream);
    std::vector<Mat4> poses = hemisphere_poses(count, counts.camera_radius, rng);
    std::vector<CameraFrame> frames;
    frames.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      CameraFrame f;
      f.transform = poses[static_cast<std::size_t>(i)];
      f.fov_x = counts.fov_x;
      f.width = counts.width;
      f.height = counts.height;
      char buf[32];
      std::snprintf(buf, sizeof buf, "%s_%03d", prefix, i);
      f.name = buf;
      raytrace_frame(spec, f);
      frames.push_back(std::move(f));
    }
    return frames;
  };
  ds.background = make_split(background_spec, counts.background_frames, "poses-background", "bg");
  ds.eval = make_split(eval_spec, counts.eval_frames, "poses-eval", "eval");
  return ds;
}

Dataset generate_dataset(const SceneSpec& background_spec, const SceneSpec& eval_spec,
                         const GenerateCounts& counts, std::uint64_t seed,
                         const std::filesystem::path& out_dir) {
  Dataset ds = render_scene_dataset(background_spec, eval_spec, counts, seed);
  save_dataset(ds, out_dir);
  return ds;
}

}  // namespace resnerf
