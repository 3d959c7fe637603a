// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/experiment.hpp"

#include <fstream>

#include "resnerf/errors.hpp"

namespace resnerf {

ExperimentConfig::ExperimentConfig() {
  stage_background.mode = TrainMode::kBackground;
  stage_residual.mode = TrainMode::kResidual;
}

void ExperimentConfig::validate() const {
  if (m < 0) throw ConfigError("experiment: m must be >= 0");
  if (n_samples < 1) throw ConfigError("experiment: n_samples must be >= 1");
  field.validate();
  mix.validate();
  stage_background.validate();
  stage_residual.validate();
}

nlohmann::json ExperimentConfig::to_json() const {
  return {{"dataset", dataset.string()},
          {"output", output.string()},
          {"seed", seed},
          {"m", m},
          {"n_samples", n_samples},
          {"field", field.to_json()},
          {"mix", mix.to_json()},
          {"stage_background", stage_background.to_json()},
          {"stage_residual", stage_residual.to_json()}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.dataset = j.value("dataset", c.dataset.string());
  c.output = j.value("output", c.output.string());
  c.seed = j.value("seed", c.seed);
  c.m = j.value("m", c.m);
  c.n_samples = j.value("n_samples", c.n_samples);
  if (j.contains("field")) c.field = FieldConfig::from_json(j.at("field"));
  if (j.contains("mix")) c.mix = MixConfig::from_json(j.at("mix"));

  TrainConfig base;
  base.seed = c.seed;
  base.n_samples = c.n_samples;
  base.mode = TrainMode::kBackground;
  c.stage_background = j.contains("stage_background")
                           ? TrainConfig::from_json(j.at("stage_background"), base)
                           : base;
  base.mode = TrainMode::kResidual;
  c.stage_residual = j.contains("stage_residual")
                         ? TrainConfig::from_json(j.at("stage_residual"), base)
                         : base;
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("experiment: cannot read '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("experiment: bad JSON in '" + path.string() + "': " + e.what());
  }
  return from_json(j);
}

void ExperimentConfig::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("experiment: cannot write '" + path.string() + "'");
  out << to_json().dump(2) << "\n";
}

}  // namespace resnerf
