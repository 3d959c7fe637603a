// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "resnerf/dataset.hpp"
#include "resnerf/fields.hpp"
#include "resnerf/renderer.hpp"

namespace resnerf {

/// background: stage 1 on the background split. residual / naive_residual:
/// stage 2 on the evaluation split against a frozen background field, blended
/// respectively additive. scratch: a single field on the evaluation split.
enum class TrainMode { kBackground, kResidual, kNaiveResidual, kScratch };

TrainMode train_mode_from_string(std::string_view s);
const char* to_string(TrainMode mode);

struct TrainConfig {
  int epochs = 10;
  int rays_per_batch = 4096;
  Real learning_rate = Real(1e-3);        // MLP parameters
  Real learning_rate_table = Real(1e-2);  // hash tables
  Real adam_beta1 = Real(0.9);
  Real adam_beta2 = Real(0.99);
  Real adam_eps = Real(1e-15);
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::kBackground;
  int n_samples = 128;
  bool stratified = false;
  int checkpoint_every = 0;  // epochs between checkpoint dumps; 0 = final only

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
  /// Fields absent from j keep their value in `defaults`.
  static TrainConfig from_json(const nlohmann::json& j, TrainConfig defaults);
};

/// Bias-corrected Adam over parameter groups with per-group learning rates.
/// Parameters without a grad buffer update as if their gradient were zero.
class Adam {
 public:
  struct Group {
    std::vector<Tensor> params;
    Real lr = Real(1e-3);
  };

  Adam(std::vector<Group> groups, Real beta1, Real beta2, Real eps);

  void zero_grad();
  void step();
  std::int64_t steps() const { return steps_; }

 private:
  std::vector<Group> groups_;
  std::vector<std::vector<Real>> m_, v_;
  Real beta1_, beta2_, eps_;
  std::int64_t steps_ = 0;
};

/// Mean over rays of the squared L2 color error; both inputs [N,3].
Tensor photometric_loss(const Tensor& predicted, const Tensor& target);

struct EpochLog {
  int epoch = 0;
  Real wall_seconds = 0;  // cumulative since training start
  Real loss = 0;          // ray-weighted mean over the epoch's batches
  std::optional<Real> rmse;
  std::optional<Real> mae;
};

struct TrainResult {
  std::vector<EpochLog> log;
  std::int64_t train_pixels = 0;  // pixels whose rays cross the scene box
  std::int64_t steps = 0;
};

/// Runs after each epoch; may fill the optional metric fields of the log row
/// (the caller still owns the fields being trained).
using EpochHook = std::function<void(int epoch, EpochLog& log)>;

TrainResult train_background(RadianceField& field, const Dataset& dataset,
                             const TrainConfig& config, const EpochHook& hook = {});

TrainResult train_scratch(RadianceField& field, const Dataset& dataset,
                          const TrainConfig& config, const EpochHook& hook = {});

/// Stage 2. The background field is evaluated without graph recording and its
/// parameters never enter the optimizer, so its bytes cannot change. In
/// naive_residual mode `mix` may be null and is neither evaluated nor
/// trained.
TrainResult train_residual(RadianceField& residual, MixField* mix,
                           const RadianceField& background, const Dataset& dataset,
                           const TrainConfig& config, const EpochHook& hook = {});

void write_train_log_csv(const std::filesystem::path& path, std::span<const EpochLog> log);

}  // namespace resnerf
