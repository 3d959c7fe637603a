// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "resnerf/renderer.hpp"

namespace resnerf {

struct DatasetMeta {
  std::string scene_name;
  Aabb scene_box{Vec3(-1, -1, -1), Vec3(1, 1, 1)};
  bool white_background = true;
  Vec3 background_color = Vec3(1, 1, 1);
  Real t_near = Real(0.5);
  Real t_far = Real(6.0);
  /// World bounds of the objects added on top of the background scene;
  /// evaluation crops derive from it when present.
  std::optional<Aabb> added_bbox;
};

/// Two posed image splits over the same scene: the background split (no added
/// objects) and the evaluation split (objects present).
struct Dataset {
  DatasetMeta meta;
  std::vector<CameraFrame> background;
  std::vector<CameraFrame> eval;

  const std::vector<CameraFrame>& split(std::string_view name) const;
};

/// Layout on disk: transforms_background.json / transforms_eval.json (NeRF
/// style: camera_angle_x plus frames with extensionless file_path and a
/// row-major 4x4 camera-to-world transform_matrix), images/<name>.png,
/// optional images/<name>_depth.pfm, and meta.json.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace resnerf
