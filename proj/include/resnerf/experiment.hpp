// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>

#include <json.hpp>

#include "resnerf/fields.hpp"
#include "resnerf/trainer.hpp"

namespace resnerf {

/// Everything one experiment needs besides the dataset bytes: field and blend
/// network shapes, both training stages, and render-time defaults. A config
/// plus its seed fully determines every output.
struct ExperimentConfig {
  std::filesystem::path dataset;
  std::filesystem::path output;
  std::uint64_t seed = 1;
  Real m = Real(3.0);   // density threshold for depth extraction
  int n_samples = 128;  // samples per ray at render time
  FieldConfig field;    // shared by background, residual, and scratch fields
  MixConfig mix;
  TrainConfig stage_background;
  TrainConfig stage_residual;

  ExperimentConfig();

  void validate() const;
  nlohmann::json to_json() const;
  /// Stage blocks inherit the top-level seed and n_samples unless they set
  /// their own.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;
};

}  // namespace resnerf
