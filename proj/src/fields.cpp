// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/fields.hpp"

#include <optional>

#include "resnerf/errors.hpp"

namespace resnerf {

namespace {

nlohmann::json grid_to_json(const HashGridConfig& g) {
  return {{"levels", g.levels},
          {"features_per_level", g.features_per_level},
          {"base_resolution", g.base_resolution},
          {"per_level_scale", g.per_level_scale},
          {"table_size", g.table_size},
          {"bounds_min", {g.bounds.min.x(), g.bounds.min.y(), g.bounds.min.z()}},
          {"bounds_max", {g.bounds.max.x(), g.bounds.max.y(), g.bounds.max.z()}}};
}

HashGridConfig grid_from_json(const nlohmann::json& j) {
  HashGridConfig g;
  g.levels = j.value("levels", g.levels);
  g.features_per_level = j.value("features_per_level", g.features_per_level);
  g.base_resolution = j.value("base_resolution", g.base_resolution);
  g.per_level_scale = j.value("per_level_scale", g.per_level_scale);
  g.table_size = j.value("table_size", g.table_size);
  if (j.contains("bounds_min")) {
    const auto& lo = j.at("bounds_min");
    const auto& hi = j.at("bounds_max");
    g.bounds = Aabb{Vec3(lo[0].get<Real>(), lo[1].get<Real>(), lo[2].get<Real>()),
                    Vec3(hi[0].get<Real>(), hi[1].get<Real>(), hi[2].get<Real>())};
  }
  return g;
}

void copy_from_checkpoint(const Checkpoint& ckpt, const std::string& name, Tensor* dst) {
  const Tensor& src = ckpt.at(name);
  if (src.shape() != dst->shape()) {
    throw DataError("checkpoint: tensor '" + name + "' has unexpected shape");
  }
  std::copy(src.values().begin(), src.values().end(), dst->values_mut().begin());
}

void restore_mlp(const Checkpoint& ckpt, const std::string& prefix, Mlp* mlp) {
  for (std::size_t i = 0; i < mlp->layers().size(); ++i) {
    const std::string base = prefix + "." + std::to_string(i);
    copy_from_checkpoint(ckpt, base + ".weight", &mlp->layers()[i].weight);
    copy_from_checkpoint(ckpt, base + ".bias", &mlp->layers()[i].bias);
  }
}

void set_requires_grad_all(const std::vector<std::pair<std::string, Tensor>>& params,
                           bool rg) {
  for (auto& [name, t] : params) {
    Tensor copy = t;
    copy.set_requires_grad(rg);
  }
}

}  // namespace

void FieldConfig::validate() const {
  grid.validate();
  dir_encoding.validate();
  if (trunk_width < 1 || trunk_depth < 1) {
    throw ConfigError("field: trunk_width and trunk_depth must be >= 1");
  }
}

nlohmann::json FieldConfig::to_json() const {
  return {{"grid", grid_to_json(grid)},
          {"dir_encoding",
           {{"num_frequencies", dir_encoding.num_frequencies},
            {"include_input", dir_encoding.include_input}}},
          {"trunk_width", trunk_width},
          {"trunk_depth", trunk_depth}};
}

FieldConfig FieldConfig::from_json(const nlohmann::json& j) {
  FieldConfig c;
  if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
  if (j.contains("dir_encoding")) {
    const auto& d = j.at("dir_encoding");
    c.dir_encoding.num_frequencies = d.value("num_frequencies", c.dir_encoding.num_frequencies);
    c.dir_encoding.include_input = d.value("include_input", c.dir_encoding.include_input);
  }
  c.trunk_width = j.value("trunk_width", c.trunk_width);
  c.trunk_depth = j.value("trunk_depth", c.trunk_depth);
  return c;
}

void MixConfig::validate() const {
  grid.validate();
  if (trunk_width < 1 || trunk_depth < 1) {
    throw ConfigError("mix: trunk_width and trunk_depth must be >= 1");
  }
}

nlohmann::json MixConfig::to_json() const {
  return {{"grid", grid_to_json(grid)},
          {"trunk_width", trunk_width},
          {"trunk_depth", trunk_depth}};
}

MixConfig MixConfig::from_json(const nlohmann::json& j) {
  MixConfig c;
  if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"));
  c.trunk_width = j.value("trunk_width", c.trunk_width);
  c.trunk_depth = j.value("trunk_depth", c.trunk_depth);
  return c;
}

// ---- RadianceField --------------------------------------------------------

RadianceField RadianceField::create(const FieldConfig& config, std::uint64_t seed,
                                    std::string_view stream_name) {
  config.validate();
  RadianceField field;
  field.config_ = config;
  RngStream rng(seed, stream_name);
  field.table_ = make_hash_table(config.grid, rng);
  std::vector<int> widths(static_cast<std::size_t>(config.trunk_depth), config.trunk_width);
  field.trunk_ = Mlp::create(config.grid.feature_dim(), widths, true, rng);
  field.density_head_ = LinearLayer::create(config.trunk_width, 1, rng);
  field.color_head_ =
      LinearLayer::create(config.trunk_width + config.dir_encoding.dim(), 3, rng);
  return field;
}

FieldBatch RadianceField::eval_batch(const std::vector<Vec3>& positions,
                                     const std::vector<Vec3>& dirs) const {
  if (positions.size() != dirs.size()) {
    throw DimensionError("eval_batch: positions and dirs differ in length");
  }
  std::optional<Graph::NoGrad> guard;
  if (frozen_) guard.emplace();

  Tensor enc = hash_encode_batch(positions, config_.grid, table_);
  Tensor feat = trunk_.forward(enc);
  Tensor sigma = softplus(density_head_.forward(feat));
  Tensor dir_feat = freq_encode_batch(dirs, config_.dir_encoding);
  Tensor c_prime = color_head_.forward(concat_cols({feat, dir_feat}));
  return FieldBatch{sigma, c_prime};
}

std::vector<std::pair<std::string, Tensor>> RadianceField::parameters() const {
  std::vector<std::pair<std::string, Tensor>> params;
  params.emplace_back("grid.table", table_);
  trunk_.collect_parameters("trunk", &params);
  params.emplace_back("density_head.weight", density_head_.weight);
  params.emplace_back("density_head.bias", density_head_.bias);
  params.emplace_back("color_head.weight", color_head_.weight);
  params.emplace_back("color_head.bias", color_head_.bias);
  return params;
}

std::vector<Tensor> RadianceField::mlp_parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : parameters()) {
    if (name != "grid.table") out.push_back(t);
  }
  return out;
}

Checkpoint RadianceField::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.config = {{"kind", "radiance_field"}, {"field", config_.to_json()}};
  for (auto& [name, t] : parameters()) ckpt.add(name, t);
  return ckpt;
}

RadianceField RadianceField::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.config.value("kind", "") != "radiance_field") {
    throw DataError("checkpoint: expected a radiance_field checkpoint");
  }
  RadianceField field = create(FieldConfig::from_json(ckpt.config.at("field")), 0, "restore");
  copy_from_checkpoint(ckpt, "grid.table", &field.table_);
  restore_mlp(ckpt, "trunk", &field.trunk_);
  copy_from_checkpoint(ckpt, "density_head.weight", &field.density_head_.weight);
  copy_from_checkpoint(ckpt, "density_head.bias", &field.density_head_.bias);
  copy_from_checkpoint(ckpt, "color_head.weight", &field.color_head_.weight);
  copy_from_checkpoint(ckpt, "color_head.bias", &field.color_head_.bias);
  set_requires_grad_all(field.parameters(), false);
  return field;
}

// ---- MixField -------------------------------------------------------------

MixField MixField::create(const MixConfig& config, std::uint64_t seed,
                          std::string_view stream_name) {
  config.validate();
  MixField mix;
  mix.config_ = config;
  RngStream rng(seed, stream_name);
  mix.table_ = make_hash_table(config.grid, rng);
  std::vector<int> widths(static_cast<std::size_t>(config.trunk_depth), config.trunk_width);
  mix.trunk_ = Mlp::create(config.grid.feature_dim(), widths, true, rng);
  mix.head_ = LinearLayer::create(config.trunk_width, 1, rng);
  return mix;
}

Tensor MixField::eval_logit_batch(const std::vector<Vec3>& positions) const {
  Tensor enc = hash_encode_batch(positions, config_.grid, table_);
  return head_.forward(trunk_.forward(enc));
}

Tensor MixField::eval_beta_batch(const std::vector<Vec3>& positions) const {
  return sigmoid(eval_logit_batch(positions));
}

void MixField::pin_logit(Real logit) {
  auto w = head_.weight.values_mut();
  std::fill(w.begin(), w.end(), Real(0));
  head_.bias.values_mut()[0] = logit;
}

std::vector<std::pair<std::string, Tensor>> MixField::parameters() const {
  std::vector<std::pair<std::string, Tensor>> params;
  params.emplace_back("grid.table", table_);
  trunk_.collect_parameters("trunk", &params);
  params.emplace_back("head.weight", head_.weight);
  params.emplace_back("head.bias", head_.bias);
  return params;
}

std::vector<Tensor> MixField::mlp_parameters() const {
  std::vector<Tensor> out;
  for (auto& [name, t] : parameters()) {
    if (name != "grid.table") out.push_back(t);
  }
  return out;
}

Checkpoint MixField::to_checkpoint() const {
  Checkpoint ckpt;
  ckpt.config = {{"kind", "mix_field"}, {"mix", config_.to_json()}};
  for (auto& [name, t] : parameters()) ckpt.add(name, t);
  return ckpt;
}

MixField MixField::from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.config.value("kind", "") != "mix_field") {
    throw DataError("checkpoint: expected a mix_field checkpoint");
  }
  MixField mix = create(MixConfig::from_json(ckpt.config.at("mix")), 0, "restore");
  copy_from_checkpoint(ckpt, "grid.table", &mix.table_);
  restore_mlp(ckpt, "trunk", &mix.trunk_);
  copy_from_checkpoint(ckpt, "head.weight", &mix.head_.weight);
  copy_from_checkpoint(ckpt, "head.bias", &mix.head_.bias);
  set_requires_grad_all(mix.parameters(), false);
  return mix;
}

// ---- single-point and composition ----------------------------------------

FieldOutput eval_field(const RadianceField& field, const Vec3& pos, const Vec3& dir) {
  Graph::NoGrad off;
  FieldBatch batch = field.eval_batch({pos}, {dir});
  FieldOutput out;
  out.sigma = batch.sigma.values()[0];
  out.c_prime = Vec3(batch.c_prime.values()[0], batch.c_prime.values()[1],
                     batch.c_prime.values()[2]);
  return out;
}

Real eval_mix(const MixField& mix, const Vec3& pos) {
  Graph::NoGrad off;
  return sigmoid_scalar(mix.eval_logit_batch({pos}).values()[0]);
}

std::pair<Real, Vec3> compose_residual(const FieldOutput& bg, const FieldOutput& res,
                                       Real beta) {
  const Real omb = Real(1) - beta;
  const Real sigma = omb * bg.sigma + beta * res.sigma;
  const Vec3 mixed = omb * bg.c_prime + beta * res.c_prime;
  return {sigma, Vec3(sigmoid_scalar(mixed.x()), sigmoid_scalar(mixed.y()),
                      sigmoid_scalar(mixed.z()))};
}

std::pair<Real, Vec3> compose_naive(const FieldOutput& bg, const FieldOutput& res) {
  const Real sigma = bg.sigma + res.sigma;
  const Vec3 summed = bg.c_prime + res.c_prime;
  return {sigma, Vec3(sigmoid_scalar(summed.x()), sigmoid_scalar(summed.y()),
                      sigmoid_scalar(summed.z()))};
}

FieldBatch compose_batch_residual(const FieldBatch& bg, const FieldBatch& res,
                                  const Tensor& beta) {
  Tensor one = Tensor::full(beta.shape(), 1);
  Tensor omb = subtract(one, beta);
  FieldBatch out;
  out.sigma = add(multiply(omb, bg.sigma), multiply(beta, res.sigma));
  out.c_prime = add(multiply(bg.c_prime, omb), multiply(res.c_prime, beta));
  return out;
}

FieldBatch compose_batch_naive(const FieldBatch& bg, const FieldBatch& res) {
  FieldBatch out;
  out.sigma = add(bg.sigma, res.sigma);
  out.c_prime = add(bg.c_prime, res.c_prime);
  return out;
}

}  // namespace resnerf
