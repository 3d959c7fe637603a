// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>

#include "resnerf/errors.hpp"
#include "resnerf/image_io.hpp"

namespace resnerf {

namespace {

constexpr int kImageChunkRays = 2048;

void require_field(const void* ptr, const char* what) {
  if (!ptr) throw ConfigError(std::string("render: bundle is missing the ") + what + " field");
}

Vec3 background_rgb(const RenderOptions& opt) {
  return opt.white_background ? Vec3(1, 1, 1) : Vec3(0, 0, 0);
}

}  // namespace

void CameraFrame::validate() const {
  if (width <= 0 || height <= 0) throw DataError("camera: non-positive image size");
  if (!(fov_x > Real(0) && fov_x < kPi)) throw DataError("camera: fov_x outside (0, pi)");
  if (!transform.allFinite()) throw DataError("camera: non-finite transform");
  const Mat3 r = transform.block<3, 3>(0, 0);
  const Mat3 err = r.transpose() * r - Mat3::Identity();
  if (err.cwiseAbs().maxCoeff() > Real(1e-5)) {
    throw DataError("camera: rotation block of '" + name + "' is not orthonormal");
  }
}

Vec3 CameraFrame::pixel(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return Vec3(image[i], image[i + 1], image[i + 2]) / Real(255);
}

RenderMode render_mode_from_string(std::string_view s) {
  if (s == "single") return RenderMode::kSingle;
  if (s == "residual") return RenderMode::kResidual;
  if (s == "naive") return RenderMode::kNaive;
  throw ConfigError("render: unknown mode '" + std::string(s) +
                    "' (expected single, residual, or naive)");
}

const char* to_string(RenderMode mode) {
  switch (mode) {
    case RenderMode::kSingle: return "single";
    case RenderMode::kResidual: return "residual";
    case RenderMode::kNaive: return "naive";
  }
  return "?";
}

DepthMethod depth_method_from_string(std::string_view s) {
  if (s == "expected") return DepthMethod::kExpected;
  if (s == "threshold") return DepthMethod::kThreshold;
  throw ConfigError("render: unknown depth method '" + std::string(s) +
                    "' (expected expected or threshold)");
}

const char* to_string(DepthMethod method) {
  return method == DepthMethod::kExpected ? "expected" : "threshold";
}

PixelRayGen::PixelRayGen(const CameraFrame& frame, Real t_near, Real t_far)
    : rot_(frame.transform.block<3, 3>(0, 0)),
      origin_(frame.transform.block<3, 1>(0, 3)),
      focal_((Real(frame.width) / 2) / std::tan(frame.fov_x / 2)),
      half_w_(Real(frame.width) / 2),
      half_h_(Real(frame.height) / 2),
      t_near_(t_near),
      t_far_(t_far) {
  frame.validate();
  if (!(t_near >= 0 && t_near < t_far)) throw ConfigError("render: need 0 <= t_near < t_far");
}

Ray PixelRayGen::ray(int x, int y) const {
  const Real cx = (Real(x) + Real(0.5) - half_w_) / focal_;
  const Real cy = (half_h_ - (Real(y) + Real(0.5))) / focal_;
  Ray r;
  r.origin = origin_;
  r.direction = (rot_ * Vec3(cx, cy, Real(-1))).normalized();
  r.t_near = t_near_;
  r.t_far = t_far_;
  return r;
}

std::vector<Ray> generate_rays(const CameraFrame& frame, Real t_near, Real t_far) {
  const PixelRayGen gen(frame, t_near, t_far);
  std::vector<Ray> rays;
  rays.reserve(static_cast<std::size_t>(frame.width) * frame.height);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) rays.push_back(gen.ray(x, y));
  }
  return rays;
}

std::optional<Ray> clip_ray_to_box(const Ray& ray, const Aabb& box) {
  auto span = box.clip_ray(ray.origin, ray.direction, ray.t_near, ray.t_far);
  if (!span) return std::nullopt;
  Ray out = ray;
  out.t_near = span->first;
  out.t_far = span->second;
  return out;
}

RaySamples sample_ray(const Ray& ray, int n_samples, bool stratified, RngStream* rng) {
  if (n_samples < 2) throw ConfigError("render: n_samples must be >= 2");
  if (!(ray.t_near < ray.t_far)) throw ConfigError("render: ray has empty [t_near, t_far]");
  const Real bin = (ray.t_far - ray.t_near) / Real(n_samples);
  RaySamples s;
  s.t.resize(static_cast<std::size_t>(n_samples));
  s.delta.resize(static_cast<std::size_t>(n_samples));
  for (int i = 0; i < n_samples; ++i) {
    const Real u = (stratified && rng) ? rng->uniform() : Real(0.5);
    s.t[static_cast<std::size_t>(i)] = ray.t_near + (Real(i) + u) * bin;
  }
  for (int i = 0; i + 1 < n_samples; ++i) {
    s.delta[static_cast<std::size_t>(i)] =
        s.t[static_cast<std::size_t>(i) + 1] - s.t[static_cast<std::size_t>(i)];
  }
  s.delta[static_cast<std::size_t>(n_samples) - 1] =
      ray.t_far - s.t[static_cast<std::size_t>(n_samples) - 1];
  return s;
}

RayRender render_rays(const std::vector<Ray>& rays, const FieldBundle& bundle,
                      RenderMode mode, const RenderOptions& opt, RngStream* rng) {
  const int n = static_cast<int>(rays.size());
  if (n == 0) throw DimensionError("render: empty ray batch");
  const int s = opt.n_samples;

  RayRender out;
  out.samples.resize(static_cast<std::size_t>(n));
  std::vector<Vec3> pos;
  std::vector<Vec3> dirs;
  pos.reserve(static_cast<std::size_t>(n) * s);
  dirs.reserve(static_cast<std::size_t>(n) * s);
  std::vector<Real> deltas(static_cast<std::size_t>(n) * s);
  for (int i = 0; i < n; ++i) {
    const Ray& ray = rays[static_cast<std::size_t>(i)];
    RaySamples& rs = out.samples[static_cast<std::size_t>(i)];
    rs = sample_ray(ray, s, opt.stratified, rng);
    for (int j = 0; j < s; ++j) {
      pos.push_back(ray.origin + rs.t[static_cast<std::size_t>(j)] * ray.direction);
      dirs.push_back(ray.direction);
      deltas[static_cast<std::size_t>(i) * s + j] = rs.delta[static_cast<std::size_t>(j)];
    }
  }
  Tensor delta = make_tensor({n, s}, std::move(deltas), false);

  FieldBatch composed;
  switch (mode) {
    case RenderMode::kSingle:
      require_field(bundle.single, "single");
      composed = bundle.single->eval_batch(pos, dirs);
      break;
    case RenderMode::kResidual: {
      require_field(bundle.background, "background");
      require_field(bundle.residual, "residual");
      require_field(bundle.mix, "mix");
      FieldBatch bg = bundle.background->eval_batch(pos, dirs);
      FieldBatch res = bundle.residual->eval_batch(pos, dirs);
      Tensor beta = bundle.mix->eval_beta_batch(pos);
      composed = compose_batch_residual(bg, res, beta);
      break;
    }
    case RenderMode::kNaive: {
      require_field(bundle.background, "background");
      require_field(bundle.residual, "residual");
      FieldBatch bg = bundle.background->eval_batch(pos, dirs);
      FieldBatch res = bundle.residual->eval_batch(pos, dirs);
      composed = compose_batch_naive(bg, res);
      break;
    }
  }

  out.sigma = reshape(composed.sigma, {n, s});
  Tensor occ = multiply(out.sigma, delta);
  Tensor trans = resnerf::exp(negate(cumsum_exclusive_rows(occ)));
  Tensor alpha = subtract(Tensor::full({n, s}, 1), resnerf::exp(negate(occ)));
  Tensor weights = multiply(trans, alpha);
  Tensor color = sigmoid(composed.c_prime);

  Tensor leftover;
  if (opt.white_background) leftover = resnerf::exp(negate(sum_rows(occ)));
  std::vector<Tensor> channels;
  channels.reserve(3);
  for (int ch = 0; ch < 3; ++ch) {
    Tensor c_ch = reshape(slice_cols(color, ch, ch + 1), {n, s});
    Tensor acc = sum_rows(multiply(weights, c_ch));
    if (opt.white_background) acc = add(acc, leftover);
    channels.push_back(acc);
  }
  out.rgb = concat_cols(channels);
  return out;
}

Vec3 render_color(const Ray& ray, const FieldBundle& bundle, RenderMode mode,
                  const RenderOptions& opt, RngStream* rng) {
  Graph::NoGrad off;
  RayRender rr = render_rays({ray}, bundle, mode, opt, rng);
  return Vec3(rr.rgb.values()[0], rr.rgb.values()[1], rr.rgb.values()[2]);
}

namespace {

std::pair<Real, bool> expected_depth_from(const std::span<const Real> sigma,
                                          const RaySamples& rs) {
  Real trans = 1, acc = 0, wsum = 0;
  for (std::size_t j = 0; j < rs.t.size(); ++j) {
    const Real seg = std::exp(-sigma[j] * rs.delta[j]);
    const Real w = trans * (Real(1) - seg);
    acc += w * rs.t[j];
    wsum += w;
    trans *= seg;
  }
  return {acc, wsum > Real(0.5)};
}

std::pair<Real, bool> threshold_depth_from(const std::span<const Real> sigma,
                                           const RaySamples& rs, Real t_far, Real m) {
  for (std::size_t j = 0; j < rs.t.size(); ++j) {
    if (sigma[j] >= m) return {rs.t[j], true};
  }
  return {t_far, false};
}

}  // namespace

std::pair<Real, bool> render_depth_expected(const Ray& ray, const FieldBundle& bundle,
                                            RenderMode mode, const RenderOptions& opt) {
  Graph::NoGrad off;
  RayRender rr = render_rays({ray}, bundle, mode, opt, nullptr);
  return expected_depth_from(rr.sigma.values(), rr.samples[0]);
}

std::pair<Real, bool> render_depth_threshold(const Ray& ray, const FieldBundle& bundle,
                                             RenderMode mode, const RenderOptions& opt,
                                             Real m) {
  if (m < Real(0)) throw ConfigError("render: density threshold m must be >= 0");
  Graph::NoGrad off;
  RayRender rr = render_rays({ray}, bundle, mode, opt, nullptr);
  return threshold_depth_from(rr.sigma.values(), rr.samples[0], ray.t_far, m);
}

RenderedImage render_image(const CameraFrame& frame, const FieldBundle& bundle,
                           RenderMode mode, const RenderOptions& opt, const Aabb& scene_box,
                           Real t_near, Real t_far) {
  Graph::NoGrad off;
  const std::vector<Ray> rays = generate_rays(frame, t_near, t_far);
  RenderedImage img;
  img.width = frame.width;
  img.height = frame.height;
  const Vec3 bg = background_rgb(opt);
  img.rgb.resize(rays.size() * 3);

  std::vector<Ray> chunk;
  std::vector<std::size_t> chunk_idx;
  auto flush = [&]() {
    if (chunk.empty()) return;
    RayRender rr = render_rays(chunk, bundle, mode, opt, nullptr);
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      for (int ch = 0; ch < 3; ++ch) {
        img.rgb[chunk_idx[k] * 3 + static_cast<std::size_t>(ch)] =
            rr.rgb.values()[k * 3 + static_cast<std::size_t>(ch)];
      }
    }
    chunk.clear();
    chunk_idx.clear();
  };

  for (std::size_t i = 0; i < rays.size(); ++i) {
    if (auto clipped = clip_ray_to_box(rays[i], scene_box)) {
      chunk.push_back(*clipped);
      chunk_idx.push_back(i);
      if (static_cast<int>(chunk.size()) >= kImageChunkRays) flush();
    } else {
      for (int ch = 0; ch < 3; ++ch) img.rgb[i * 3 + static_cast<std::size_t>(ch)] = bg[ch];
    }
  }
  flush();
  return img;
}

DepthMap render_depth_map(const CameraFrame& frame, const FieldBundle& bundle,
                          RenderMode mode, const RenderOptions& opt, const Aabb& scene_box,
                          Real t_near, Real t_far, DepthMethod method, Real m) {
  if (method == DepthMethod::kThreshold && m < Real(0)) {
    throw ConfigError("render: density threshold m must be >= 0");
  }
  Graph::NoGrad off;
  const std::vector<Ray> rays = generate_rays(frame, t_near, t_far);
  DepthMap map;
  map.width = frame.width;
  map.height = frame.height;
  map.depth.assign(rays.size(), t_far);
  map.valid.assign(rays.size(), 0);

  std::vector<Ray> chunk;
  std::vector<std::size_t> chunk_idx;
  auto flush = [&]() {
    if (chunk.empty()) return;
    RayRender rr = render_rays(chunk, bundle, mode, opt, nullptr);
    const int s = opt.n_samples;
    for (std::size_t k = 0; k < chunk.size(); ++k) {
      const auto sigma = rr.sigma.values().subspan(k * static_cast<std::size_t>(s),
                                                   static_cast<std::size_t>(s));
      const auto [d, ok] = method == DepthMethod::kExpected
                               ? expected_depth_from(sigma, rr.samples[k])
                               : threshold_depth_from(sigma, rr.samples[k], t_far, m);
      map.depth[chunk_idx[k]] = ok ? d : t_far;
      map.valid[chunk_idx[k]] = ok ? 1 : 0;
    }
    chunk.clear();
    chunk_idx.clear();
  };

  for (std::size_t i = 0; i < rays.size(); ++i) {
    if (auto clipped = clip_ray_to_box(rays[i], scene_box)) {
      chunk.push_back(*clipped);
      chunk_idx.push_back(i);
      if (static_cast<int>(chunk.size()) >= kImageChunkRays) flush();
    }
  }
  flush();
  return map;
}

void write_depth_outputs(const std::filesystem::path& base, const DepthMap& map, Real t_far) {
  ImageF32 pfm;
  pfm.width = map.width;
  pfm.height = map.height;
  pfm.pixels.assign(map.depth.begin(), map.depth.end());
  write_pfm(base.string() + ".pfm", pfm);

  const Real scale = t_far / Real(65535);
  ImageGray16 png;
  png.width = map.width;
  png.height = map.height;
  png.pixels.resize(map.depth.size());
  for (std::size_t i = 0; i < map.depth.size(); ++i) {
    const Real units = std::clamp(map.depth[i] / scale, Real(0), Real(65535));
    png.pixels[i] = static_cast<std::uint16_t>(std::lround(units));
  }
  write_png_gray16(base.string() + ".png", png);

  ImageRgb8 mask;
  mask.width = map.width;
  mask.height = map.height;
  mask.pixels.resize(map.valid.size() * 3);
  for (std::size_t i = 0; i < map.valid.size(); ++i) {
    const std::uint8_t v = map.valid[i] ? 255 : 0;
    mask.pixels[i * 3] = mask.pixels[i * 3 + 1] = mask.pixels[i * 3 + 2] = v;
  }
  write_png_rgb8(base.string() + "_valid.png", mask);

  nlohmann::json sidecar = {
      {"width", map.width},
      {"height", map.height},
      {"t_far", t_far},
      {"scale_meters_per_unit", scale},
      {"holes", static_cast<std::int64_t>(
                    std::count(map.valid.begin(), map.valid.end(), std::uint8_t(0)))}};
  if (map.crop) {
    sidecar["crop"] = {{"x0", map.crop->x0},
                       {"y0", map.crop->y0},
                       {"x1", map.crop->x1},
                       {"y1", map.crop->y1}};
  }
  std::ofstream out(base.string() + ".json");
  out << sidecar.dump(2) << "\n";
  if (!out) throw DataError("depth: cannot write sidecar for '" + base.string() + "'");
}

DepthMap read_depth_outputs(const std::filesystem::path& base) {
  ImageF32 pfm = read_pfm(base.string() + ".pfm");
  std::ifstream in(base.string() + ".json");
  if (!in) throw DataError("depth: missing sidecar '" + base.string() + ".json'");
  nlohmann::json sidecar;
  try {
    in >> sidecar;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("depth: bad sidecar JSON for '" + base.string() + "': " + e.what());
  }

  DepthMap map;
  map.width = pfm.width;
  map.height = pfm.height;
  map.depth.assign(pfm.pixels.begin(), pfm.pixels.end());
  ImageRgb8 mask = read_png_rgb8(base.string() + "_valid.png");
  if (mask.width != map.width || mask.height != map.height) {
    throw DataError("depth: validity mask size mismatch for '" + base.string() + "'");
  }
  map.valid.resize(map.depth.size());
  for (std::size_t i = 0; i < map.valid.size(); ++i) {
    map.valid[i] = mask.pixels[i * 3] > 127 ? 1 : 0;
  }
  if (sidecar.contains("crop")) {
    const auto& c = sidecar.at("crop");
    map.crop = CropRect{c.at("x0").get<int>(), c.at("y0").get<int>(), c.at("x1").get<int>(),
                        c.at("y1").get<int>()};
  }
  return map;
}

}  // namespace resnerf
