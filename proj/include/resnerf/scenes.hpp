// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "resnerf/dataset.hpp"
#include "resnerf/rng.hpp"

namespace resnerf {

/// Surface appearance. Transmissive surfaces pass the ray straight through:
/// each surface crossing multiplies the carried throughput by `attenuation`
/// and adds a specular highlight, so a solid glass object dims what is behind
/// it twice (entry and exit). Opaque surfaces shade Lambertian + specular and
/// terminate the ray.
struct Material {
  Vec3 albedo = Vec3(Real(0.7), Real(0.7), Real(0.7));
  Vec3 albedo_alt = Vec3(Real(0.7), Real(0.7), Real(0.7));
  Real checker_scale = 0;  // > 0 alternates albedo/albedo_alt on a 3d grid
  bool transmissive = false;
  Vec3 attenuation = Vec3::Ones();  // per-channel, each in (0, 1]
  Real specular = 0;                // Blinn-Phong weight, exponent fixed at 64
};

struct Primitive {
  enum class Kind { kPlane, kBox, kSphere };

  Kind kind = Kind::kSphere;
  Vec3 normal = Vec3::UnitZ();  // plane: dot(p, normal) == offset
  Real offset = 0;
  Vec3 center = Vec3::Zero();   // box and sphere
  Vec3 half = Vec3::Zero();     // box half extents
  Real radius = 0;              // sphere

  Material material;

  static Primitive plane(const Vec3& normal, Real offset, Material m);
  static Primitive box(const Vec3& center, const Vec3& half, Material m);
  static Primitive sphere(const Vec3& center, Real radius, Material m);

  /// World bounds; throws ConfigError for planes, which are unbounded.
  Aabb bounds() const;
};

struct DirectionalLight {
  Vec3 to_light = Vec3::UnitZ();  // from surface toward the light
  Vec3 intensity = Vec3::Ones();
};

struct SceneSpec {
  std::string name;
  std::vector<Primitive> primitives;
  std::vector<DirectionalLight> lights;
  Vec3 background_color = Vec3::Ones();
  Aabb scene_box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  Real ambient = Real(0.25);

  /// ConfigError unless at least one primitive is opaque, every attenuation
  /// channel is in (0,1], and every light direction is nonzero.
  void validate() const;
};

struct Hit {
  Real t = kInf;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();  // flipped to face the incoming ray
  const Primitive* prim = nullptr;

  bool valid() const { return prim != nullptr; }
};

/// Nearest primitive hit at parameter > t_min, or an invalid Hit.
Hit intersect_scene(const SceneSpec& spec, const Vec3& origin, const Vec3& dir, Real t_min);

struct TraceResult {
  Vec3 color = Vec3::Zero();
  Real depth = kInf;  // distance to the first surface of any kind
};

/// Shades one ray. No shadows and no bounces besides the straight-line
/// transmissive continuation, so a pixel's value depends only on the
/// primitives its ray actually crosses.
TraceResult trace_ray(const SceneSpec& spec, const Vec3& origin, const Vec3& dir);

/// Renders frame.image (RGB8, round(clamp01 * 255)) and frame.gt_depth
/// (first-hit distance, kInf on miss) using the same pixel rays the neural
/// renderer casts. Requires width/height set.
void raytrace_frame(const SceneSpec& spec, CameraFrame& frame);

/// Camera-to-world pose at `position` looking at the origin with world +z as
/// the up reference (falls back to +y when looking straight down or up).
Mat4 look_at_origin(const Vec3& position);

/// n poses at distance `radius`, uniformly distributed over the upper
/// hemisphere band between 10 and 85 degrees elevation, all looking at the
/// origin. Consumes 2n draws from rng.
std::vector<Mat4> hemisphere_poses(int n, Real radius, RngStream& rng);

/// An evaluation scene is the background scene plus appended primitives;
/// added_bbox bounds the appended ones.
struct BuiltinScene {
  SceneSpec background;
  SceneSpec eval;
  Aabb added_bbox;
};

/// "A": opaque props plus an added transmissive capsule (box body, sphere cap).
/// "B": opaque props plus an added transmissive sphere.
/// "C": a transmissive box already in the background plus an added
/// transmissive sphere. Unknown names throw ConfigError.
BuiltinScene builtin_scene(std::string_view name);

struct GenerateCounts {
  int background_frames = 100;
  int eval_frames = 50;
  int width = 200;
  int height = 200;
  Real camera_radius = Real(2.8);
  Real fov_x = Real(0.8726646259971648);
};

/// Renders both splits in memory. Poses come from RngStream(seed,
/// "poses-background") and RngStream(seed, "poses-eval"); frames are named
/// bg_### / eval_###. eval_spec must extend background_spec's primitive list;
/// the bounds of the appended primitives become meta.added_bbox.
Dataset render_scene_dataset(const SceneSpec& background_spec, const SceneSpec& eval_spec,
                             const GenerateCounts& counts, std::uint64_t seed);

/// render_scene_dataset followed by save_dataset(out_dir). Regeneration with
/// the same arguments is byte-identical on disk.
Dataset generate_dataset(const SceneSpec& background_spec, const SceneSpec& eval_spec,
                         const GenerateCounts& counts, std::uint64_t seed,
                         const std::filesystem::path& out_dir);

}  // namespace resnerf
