// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "resnerf/fields.hpp"
#include "resnerf/rng.hpp"

namespace resnerf {

/// Posed pinhole camera plus optional captured data. The camera looks along
/// its -z axis with x right and y up (NeRF-synthetic convention); transform
/// is camera-to-world.
struct CameraFrame {
  Mat4 transform = Mat4::Identity();
  Real fov_x = Real(0.8726646259971648);  // 50 degrees
  int width = 0;
  int height = 0;
  std::string name;
  std::vector<std::uint8_t> image;  // optional RGB8, row-major
  std::vector<Real> gt_depth;       // optional ray-distance depth, kInf = miss

  /// Throws DataError on a non-orthonormal rotation block or bad fov.
  void validate() const;

  /// Pixel color as reals in [0,1]. Requires image data.
  Vec3 pixel(int x, int y) const;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
  Real t_near = 0;
  Real t_far = 1;
};

/// Ascending sample distances along one ray and their spacings; the last
/// spacing closes the interval to t_far.
struct RaySamples {
  std::vector<Real> t;
  std::vector<Real> delta;
};

/// The fields a render draws from. Single mode reads `single`; residual and
/// naive modes read background + residual, residual mode additionally mix.
struct FieldBundle {
  const RadianceField* single = nullptr;
  const RadianceField* background = nullptr;
  const RadianceField* residual = nullptr;
  const MixField* mix = nullptr;
};

enum class RenderMode { kSingle, kResidual, kNaive };

RenderMode render_mode_from_string(std::string_view s);
const char* to_string(RenderMode mode);

struct RenderOptions {
  int n_samples = 128;
  bool white_background = true;
  bool stratified = false;
};

/// Per-frame camera basis for casting single pixel rays without materializing
/// the whole grid; generate_rays is the all-pixels convenience over this.
class PixelRayGen {
 public:
  PixelRayGen(const CameraFrame& frame, Real t_near, Real t_far);
  Ray ray(int x, int y) const;

 private:
  Mat3 rot_;
  Vec3 origin_;
  Real focal_, half_w_, half_h_, t_near_, t_far_;
};

/// One ray per pixel, row-major, through pixel centers.
std::vector<Ray> generate_rays(const CameraFrame& frame, Real t_near, Real t_far);

/// Ray with bounds tightened to the box overlap, or nullopt when the ray
/// misses the box.
std::optional<Ray> clip_ray_to_box(const Ray& ray, const Aabb& box);

/// Stratified: one uniform draw per equal bin; deterministic (rng null or
/// stratified off): bin midpoints.
RaySamples sample_ray(const Ray& ray, int n_samples, bool stratified, RngStream* rng);

/// Batched differentiable render. sigma holds the composed per-sample
/// densities [N, n_samples]; rgb [N,3] is the quadrature result, with leftover
/// transmittance composited to white when the option is set.
struct RayRender {
  Tensor rgb;
  Tensor sigma;
  std::vector<RaySamples> samples;
};
RayRender render_rays(const std::vector<Ray>& rays, const FieldBundle& bundle,
                      RenderMode mode, const RenderOptions& opt, RngStream* rng = nullptr);

/// Single-ray conveniences; these never record a graph.
Vec3 render_color(const Ray& ray, const FieldBundle& bundle, RenderMode mode,
                  const RenderOptions& opt, RngStream* rng = nullptr);
/// Density-weighted mean sample distance. Marked invalid (second member
/// false) when the accumulated weight stays below one half, e.g. empty space.
std::pair<Real, bool> render_depth_expected(const Ray& ray, const FieldBundle& bundle,
                                            RenderMode mode, const RenderOptions& opt);
/// Distance of the first sample whose composed density reaches m; (t_far,
/// false) when none does.
std::pair<Real, bool> render_depth_threshold(const Ray& ray, const FieldBundle& bundle,
                                             RenderMode mode, const RenderOptions& opt, Real m);

struct RenderedImage {
  int width = 0;
  int height = 0;
  std::vector<Real> rgb;  // row-major, [0,1]
};
/// Full-frame render; rays missing the scene box get the background color
/// (white or black per the white_background option).
RenderedImage render_image(const CameraFrame& frame, const FieldBundle& bundle,
                           RenderMode mode, const RenderOptions& opt, const Aabb& scene_box,
                           Real t_near, Real t_far);

enum class DepthMethod { kExpected, kThreshold };
DepthMethod depth_method_from_string(std::string_view s);
const char* to_string(DepthMethod method);

struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<Real> depth;         // invalid pixels carry the t_far fallback
  std::vector<std::uint8_t> valid;  // 0/1
  std::optional<CropRect> crop;

  Real at(int x, int y) const { return depth[static_cast<std::size_t>(y) * width + x]; }
  bool valid_at(int x, int y) const {
    return valid[static_cast<std::size_t>(y) * width + x] != 0;
  }
};

DepthMap render_depth_map(const CameraFrame& frame, const FieldBundle& bundle,
                          RenderMode mode, const RenderOptions& opt, const Aabb& scene_box,
                          Real t_near, Real t_far, DepthMethod method, Real m);

/// Writes <base>.pfm (raw f32), <base>.png (16-bit, scaled to t_far),
/// <base>_valid.png, and <base>.json (scale, dimensions, crop, hole count).
void write_depth_outputs(const std::filesystem::path& base, const DepthMap& map, Real t_far);
/// Reads the PFM + sidecar pair back into a DepthMap.
DepthMap read_depth_outputs(const std::filesystem::path& base);

}  // namespace resnerf
