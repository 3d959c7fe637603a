// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "resnerf/checkpoint.hpp"
#include "resnerf/encodings.hpp"
#include "resnerf/nn.hpp"

namespace resnerf {

struct FieldConfig {
  HashGridConfig grid;
  FreqEncodingConfig dir_encoding;
  int trunk_width = 64;
  int trunk_depth = 2;

  void validate() const;
  nlohmann::json to_json() const;
  static FieldConfig from_json(const nlohmann::json& j);
};

struct MixConfig {
  HashGridConfig grid;
  int trunk_width = 32;
  int trunk_depth = 2;

  void validate() const;
  nlohmann::json to_json() const;
  static MixConfig from_json(const nlohmann::json& j);
};

/// Point response of a radiance field: pre-activation color and activated
/// (nonnegative) density.
struct FieldOutput {
  Vec3 c_prime = Vec3::Zero();
  Real sigma = 0;
};

/// Batched field response. sigma is [P,1], c_prime [P,3]; colors stay
/// pre-activation so composition happens before the sigmoid.
struct FieldBatch {
  Tensor sigma;
  Tensor c_prime;
};

/// Hash-encoded position -> relu trunk -> softplus density head, plus a
/// color head over trunk features concatenated with the encoded direction.
class RadianceField {
 public:
  RadianceField() = default;
  static RadianceField create(const FieldConfig& config, std::uint64_t seed,
                              std::string_view stream_name);

  /// positions and dirs must be the same length. When the field is frozen the
  /// evaluation runs without graph recording, so no gradients ever reach it.
  FieldBatch eval_batch(const std::vector<Vec3>& positions,
                        const std::vector<Vec3>& dirs) const;

  const FieldConfig& config() const { return config_; }
  bool frozen() const { return frozen_; }
  void set_frozen(bool f) { frozen_ = f; }

  /// Named parameters in fixed (checkpoint) order.
  std::vector<std::pair<std::string, Tensor>> parameters() const;
  /// Hash table on its own: trained at a higher learning rate than the MLPs.
  Tensor table() const { return table_; }
  std::vector<Tensor> mlp_parameters() const;

  Checkpoint to_checkpoint() const;
  /// Rebuilds a field from a checkpoint. Loaded parameters do not require
  /// grad; freeze or retrain decisions are the caller's.
  static RadianceField from_checkpoint(const Checkpoint& ckpt);

 private:
  FieldConfig config_;
  Tensor table_;
  Mlp trunk_;
  LinearLayer density_head_;
  LinearLayer color_head_;
  bool frozen_ = false;
};

/// Position-only blend network: hash encoding -> relu trunk -> scalar logit;
/// the blend weight is beta = sigmoid(logit), strictly inside (0,1).
class MixField {
 public:
  MixField() = default;
  static MixField create(const MixConfig& config, std::uint64_t seed,
                         std::string_view stream_name);

  Tensor eval_logit_batch(const std::vector<Vec3>& positions) const;
  Tensor eval_beta_batch(const std::vector<Vec3>& positions) const;

  /// Zeroes the head weights and sets its bias, forcing the same logit (and
  /// beta) at every position. Used to drive the blend to its endpoints.
  void pin_logit(Real logit);

  const MixConfig& config() const { return config_; }
  std::vector<std::pair<std::string, Tensor>> parameters() const;
  Tensor table() const { return table_; }
  std::vector<Tensor> mlp_parameters() const;

  Checkpoint to_checkpoint() const;
  static MixField from_checkpoint(const Checkpoint& ckpt);

 private:
  MixConfig config_;
  Tensor table_;
  Mlp trunk_;
  LinearLayer head_;
};

/// Single-point conveniences (no graph participation).
FieldOutput eval_field(const RadianceField& field, const Vec3& pos, const Vec3& dir);
Real eval_mix(const MixField& mix, const Vec3& pos);

/// Blended composition: density is the convex combination
/// (1-beta)*sigma_bg + beta*sigma_res; color is the sigmoid of the equally
/// blended pre-activation colors.
std::pair<Real, Vec3> compose_residual(const FieldOutput& bg, const FieldOutput& res,
                                       Real beta);
/// Additive composition: densities add, pre-activation colors add before the
/// sigmoid.
std::pair<Real, Vec3> compose_naive(const FieldOutput& bg, const FieldOutput& res);

/// Batched composition rules over field batches; c_prime stays pre-activation.
FieldBatch compose_batch_residual(const FieldBatch& bg, const FieldBatch& res,
                                  const Tensor& beta);
FieldBatch compose_batch_naive(const FieldBatch& bg, const FieldBatch& res);

}  // namespace resnerf
