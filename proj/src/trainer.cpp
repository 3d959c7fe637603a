// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "resnerf/errors.hpp"

namespace resnerf {

TrainMode train_mode_from_string(std::string_view s) {
  if (s == "background") return TrainMode::kBackground;
  if (s == "residual") return TrainMode::kResidual;
  if (s == "naive_residual") return TrainMode::kNaiveResidual;
  if (s == "scratch") return TrainMode::kScratch;
  throw ConfigError("unknown train mode '" + std::string(s) +
                    "' (background, residual, naive_residual, scratch)");
}

const char* to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kBackground: return "background";
    case TrainMode::kResidual: return "residual";
    case TrainMode::kNaiveResidual: return "naive_residual";
    case TrainMode::kScratch: return "scratch";
  }
  return "?";
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (rays_per_batch < 1) throw ConfigError("train: rays_per_batch must be >= 1");
  if (!(learning_rate > 0) || !(learning_rate_table > 0)) {
    throw ConfigError("train: learning rates must be > 0");
  }
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1)) {
    throw ConfigError("train: adam betas must lie in [0, 1)");
  }
  if (!(adam_eps > 0)) throw ConfigError("train: adam_eps must be > 0");
  if (n_samples < 1) throw ConfigError("train: n_samples must be >= 1");
  if (checkpoint_every < 0) throw ConfigError("train: checkpoint_every must be >= 0");
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"rays_per_batch", rays_per_batch},
          {"learning_rate", learning_rate},
          {"learning_rate_table", learning_rate_table},
          {"adam_beta1", adam_beta1},
          {"adam_beta2", adam_beta2},
          {"adam_eps", adam_eps},
          {"seed", seed},
          {"mode", to_string(mode)},
          {"n_samples", n_samples},
          {"stratified", stratified},
          {"checkpoint_every", checkpoint_every}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  return from_json(j, TrainConfig{});
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, TrainConfig defaults) {
  TrainConfig c = defaults;
  c.epochs = j.value("epochs", c.epochs);
  c.rays_per_batch = j.value("rays_per_batch", c.rays_per_batch);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.learning_rate_table = j.value("learning_rate_table", c.learning_rate_table);
  c.adam_beta1 = j.value("adam_beta1", c.adam_beta1);
  c.adam_beta2 = j.value("adam_beta2", c.adam_beta2);
  c.adam_eps = j.value("adam_eps", c.adam_eps);
  c.seed = j.value("seed", c.seed);
  if (j.contains("mode")) c.mode = train_mode_from_string(j.at("mode").get<std::string>());
  c.n_samples = j.value("n_samples", c.n_samples);
  c.stratified = j.value("stratified", c.stratified);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.validate();
  return c;
}

Adam::Adam(std::vector<Group> groups, Real beta1, Real beta2, Real eps)
    : groups_(std::move(groups)), beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const Group& g : groups_) {
    for (const Tensor& p : g.params) {
      if (!p.defined()) throw ConfigError("adam: undefined parameter");
      m_.emplace_back(static_cast<std::size_t>(p.numel()), Real(0));
      v_.emplace_back(static_cast<std::size_t>(p.numel()), Real(0));
    }
  }
}

void Adam::zero_grad() {
  for (Group& g : groups_) {
    for (Tensor& p : g.params) p.zero_grad();
  }
}

void Adam::step() {
  ++steps_;
  const Real bc1 = Real(1) - std::pow(beta1_, Real(steps_));
  const Real bc2 = Real(1) - std::pow(beta2_, Real(steps_));
  std::size_t k = 0;
  for (Group& g : groups_) {
    for (Tensor& p : g.params) {
      std::span<Real> vals = p.values_mut();
      std::span<const Real> grad = p.has_grad() ? p.grad() : std::span<const Real>{};
      std::vector<Real>& m = m_[k];
      std::vector<Real>& v = v_[k];
      ++k;
      for (std::size_t i = 0; i < vals.size(); ++i) {
        const Real gi = grad.empty() ? Real(0) : grad[i];
        m[i] = beta1_ * m[i] + (Real(1) - beta1_) * gi;
        v[i] = beta2_ * v[i] + (Real(1) - beta2_) * gi * gi;
        const Real mhat = m[i] / bc1;
        const Real vhat = v[i] / bc2;
        vals[i] -= g.lr * mhat / (std::sqrt(vhat) + eps_);
      }
    }
  }
}

Tensor photometric_loss(const Tensor& predicted, const Tensor& target) {
  if (!predicted.defined() || !target.defined()) {
    throw DimensionError("photometric_loss: undefined input");
  }
  if (predicted.shape() != target.shape()) {
    throw DimensionError("photometric_loss: prediction and target shapes differ");
  }
  if (predicted.rank() != 2 || predicted.dim(1) != 3) {
    throw DimensionError("photometric_loss: expected [N,3] color batches");
  }
  Tensor total = sum_all(square(subtract(predicted, target)));
  return multiply(total, Tensor::scalar(Real(1) / Real(predicted.dim(0))));
}

namespace {

struct PixelRef {
  std::uint32_t frame;
  std::uint32_t pixel;
};

struct TrainingSet {
  std::vector<PixelRef> pixels;
  std::vector<PixelRayGen> gens;
};

// Rays that miss the scene box render the exact constant background and carry
// no gradient, so their pixels are excluded from the epoch permutation.
TrainingSet build_training_set(const std::vector<CameraFrame>& frames, const DatasetMeta& meta) {
  TrainingSet ts;
  ts.gens.reserve(frames.size());
  for (std::uint32_t fi = 0; fi < frames.size(); ++fi) {
    const CameraFrame& fr = frames[fi];
    if (fr.image.size() != static_cast<std::size_t>(fr.width) * fr.height * 3) {
      throw DataError("trainer: frame '" + fr.name + "' has no image data");
    }
    ts.gens.emplace_back(fr, meta.t_near, meta.t_far);
    const PixelRayGen& gen = ts.gens.back();
    for (int y = 0; y < fr.height; ++y) {
      for (int x = 0; x < fr.width; ++x) {
        if (clip_ray_to_box(gen.ray(x, y), meta.scene_box)) {
          ts.pixels.push_back(
              PixelRef{fi, static_cast<std::uint32_t>(y) * static_cast<std::uint32_t>(fr.width) +
                               static_cast<std::uint32_t>(x)});
        }
      }
    }
  }
  if (ts.pixels.empty()) throw DataError("trainer: no training rays cross the scene box");
  return ts;
}

TrainResult run_training(const std::vector<CameraFrame>& frames, const DatasetMeta& meta,
                         const FieldBundle& bundle, RenderMode render_mode,
                         std::vector<Adam::Group> groups, const TrainConfig& cfg,
                         const EpochHook& hook) {
  cfg.validate();
  TrainingSet ts = build_training_set(frames, meta);

  Adam adam(std::move(groups), cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
  RenderOptions opt;
  opt.n_samples = cfg.n_samples;
  opt.white_background = meta.white_background;
  opt.stratified = cfg.stratified;

  TrainResult result;
  result.train_pixels = static_cast<std::int64_t>(ts.pixels.size());

  std::vector<std::uint32_t> perm(ts.pixels.size());
  for (std::uint32_t i = 0; i < perm.size(); ++i) perm[i] = i;

  const auto start = std::chrono::steady_clock::now();
  std::vector<Ray> rays;
  std::vector<Real> targets;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    RngStream shuffle_rng(cfg.seed, "shuffle", static_cast<std::uint64_t>(epoch));
    shuffle_rng.shuffle(perm);
    RngStream jitter_rng(cfg.seed, "jitter", static_cast<std::uint64_t>(epoch));

    double loss_sum = 0;
    std::int64_t loss_rays = 0;
    for (std::size_t begin = 0; begin < perm.size(); begin += cfg.rays_per_batch) {
      const std::size_t end = std::min(perm.size(), begin + cfg.rays_per_batch);
      rays.clear();
      targets.clear();
      for (std::size_t k = begin; k < end; ++k) {
        const PixelRef pr = ts.pixels[perm[k]];
        const CameraFrame& fr = frames[pr.frame];
        const int x = static_cast<int>(pr.pixel) % fr.width;
        const int y = static_cast<int>(pr.pixel) / fr.width;
        rays.push_back(*clip_ray_to_box(ts.gens[pr.frame].ray(x, y), meta.scene_box));
        const Vec3 c = fr.pixel(x, y);
        targets.push_back(c.x());
        targets.push_back(c.y());
        targets.push_back(c.z());
      }
      const int n = static_cast<int>(rays.size());

      adam.zero_grad();
      Real batch_loss;
      {
        Graph graph;
        Tensor loss;
        {
          Graph::Scope scope(graph);
          RayRender rr = render_rays(rays, bundle, render_mode, opt,
                                     cfg.stratified ? &jitter_rng : nullptr);
          loss = photometric_loss(rr.rgb, Tensor::from_values({n, 3}, targets));
        }
        graph.backward(loss);
        batch_loss = loss.item();
      }
      adam.step();
      ++result.steps;
      loss_sum += double(batch_loss) * n;
      loss_rays += n;
    }

    EpochLog log;
    log.epoch = epoch;
    log.loss = Real(loss_sum / double(loss_rays));
    log.wall_seconds =
        std::chrono::duration<Real>(std::chrono::steady_clock::now() - start).count();
    if (hook) hook(epoch, log);
    result.log.push_back(std::move(log));
  }
  return result;
}

std::vector<Adam::Group> field_groups(const RadianceField& field, const TrainConfig& cfg) {
  return {Adam::Group{{field.table()}, cfg.learning_rate_table},
          Adam::Group{field.mlp_parameters(), cfg.learning_rate}};
}

}  // namespace

TrainResult train_background(RadianceField& field, const Dataset& dataset,
                             const TrainConfig& config, const EpochHook& hook) {
  if (config.mode != TrainMode::kBackground) {
    throw ConfigError("train_background: config mode must be 'background'");
  }
  if (dataset.background.empty()) {
    throw DataError("train_background: dataset has no background frames");
  }
  FieldBundle bundle;
  bundle.single = &field;
  return run_training(dataset.background, dataset.meta, bundle, RenderMode::kSingle,
                      field_groups(field, config), config, hook);
}

TrainResult train_scratch(RadianceField& field, const Dataset& dataset,
                          const TrainConfig& config, const EpochHook& hook) {
  if (config.mode != TrainMode::kScratch) {
    throw ConfigError("train_scratch: config mode must be 'scratch'");
  }
  if (dataset.eval.empty()) throw DataError("train_scratch: dataset has no evaluation frames");
  FieldBundle bundle;
  bundle.single = &field;
  return run_training(dataset.eval, dataset.meta, bundle, RenderMode::kSingle,
                      field_groups(field, config), config, hook);
}

TrainResult train_residual(RadianceField& residual, MixField* mix,
                           const RadianceField& background, const Dataset& dataset,
                           const TrainConfig& config, const EpochHook& hook) {
  const bool naive = config.mode == TrainMode::kNaiveResidual;
  if (config.mode != TrainMode::kResidual && !naive) {
    throw ConfigError("train_residual: config mode must be 'residual' or 'naive_residual'");
  }
  if (!naive && mix == nullptr) {
    throw ConfigError("train_residual: residual mode needs a mix field");
  }
  if (dataset.eval.empty()) throw DataError("train_residual: dataset has no evaluation frames");

  // Copies share parameter storage; the local handle just carries the frozen
  // flag so evaluation skips graph recording.
  RadianceField bg = background;
  bg.set_frozen(true);

  FieldBundle bundle;
  bundle.background = &bg;
  bundle.residual = &residual;
  bundle.mix = naive ? nullptr : mix;

  std::vector<Adam::Group> groups = field_groups(residual, config);
  if (!naive) {
    groups[0].params.push_back(mix->table());
    for (Tensor& t : mix->mlp_parameters()) groups[1].params.push_back(t);
  }
  return run_training(dataset.eval, dataset.meta, bundle,
                      naive ? RenderMode::kNaive : RenderMode::kResidual, std::move(groups),
                      config, hook);
}

void write_train_log_csv(const std::filesystem::path& path, std::span<const EpochLog> log) {
  std::ofstream out(path);
  if (!out) throw DataError("trainer: cannot write '" + path.string() + "'");
  out << "epoch,wall_seconds,loss,rmse,mae\n";
  for (const EpochLog& row : log) {
    out << row.epoch << ',' << row.wall_seconds << ',' << row.loss << ',';
    if (row.rmse) out << *row.rmse;
    out << ',';
    if (row.mae) out << *row.mae;
    out << '\n';
  }
}

}  // namespace resnerf
