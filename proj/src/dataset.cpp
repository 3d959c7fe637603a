// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "resnerf/errors.hpp"
#include "resnerf/image_io.hpp"

namespace resnerf {

namespace {

nlohmann::json vec3_to_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw DataError("dataset: expected a 3-vector");
  return Vec3(j[0].get<Real>(), j[1].get<Real>(), j[2].get<Real>());
}

nlohmann::json transform_to_json(const Mat4& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (int r = 0; r < 4; ++r) {
    rows.push_back({m(r, 0), m(r, 1), m(r, 2), m(r, 3)});
  }
  return rows;
}

Mat4 transform_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 4) throw DataError("dataset: transform_matrix must be 4x4");
  Mat4 m;
  for (int r = 0; r < 4; ++r) {
    if (!j[static_cast<std::size_t>(r)].is_array() || j[static_cast<std::size_t>(r)].size() != 4) {
      throw DataError("dataset: transform_matrix must be 4x4");
    }
    for (int c = 0; c < 4; ++c) {
      m(r, c) = j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<Real>();
    }
  }
  return m;
}

void save_split(const std::vector<CameraFrame>& frames, const std::string& split,
                const std::filesystem::path& dir) {
  if (frames.empty()) throw DataError("dataset: split '" + split + "' has no frames");
  const Real fov = frames.front().fov_x;
  nlohmann::json doc;
  doc["camera_angle_x"] = fov;
  auto& list = doc["frames"] = nlohmann::json::array();
  for (const CameraFrame& f : frames) {
    if (f.fov_x != fov) {
      throw DataError("dataset: frames of split '" + split + "' disagree on fov");
    }
    if (f.image.size() != static_cast<std::size_t>(f.width) * f.height * 3) {
      throw DataError("dataset: frame '" + f.name + "' has no image data to save");
    }
    list.push_back({{"file_path", "images/" + f.name},
                    {"transform_matrix", transform_to_json(f.transform)}});
    ImageRgb8 img{f.width, f.height, f.image};
    write_png_rgb8(dir / "images" / (f.name + ".png"), img);
    if (!f.gt_depth.empty()) {
      ImageF32 depth;
      depth.width = f.width;
      depth.height = f.height;
      depth.pixels.assign(f.gt_depth.begin(), f.gt_depth.end());
      write_pfm(dir / "images" / (f.name + "_depth.pfm"), depth);
    }
  }
  std::ofstream out(dir / ("transforms_" + split + ".json"));
  out << doc.dump(2) << "\n";
  if (!out) throw DataError("dataset: cannot write transforms_" + split + ".json");
}

std::vector<CameraFrame> load_split(const std::string& split, const std::filesystem::path& dir) {
  const std::filesystem::path json_path = dir / ("transforms_" + split + ".json");
  std::ifstream in(json_path);
  if (!in) throw DataError("dataset: missing '" + json_path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("dataset: bad JSON in '" + json_path.string() + "': " + e.what());
  }
  if (!doc.contains("camera_angle_x") || !doc.contains("frames")) {
    throw DataError("dataset: '" + json_path.string() +
                    "' lacks camera_angle_x or frames");
  }
  const Real fov = doc.at("camera_angle_x").get<Real>();

  std::vector<CameraFrame> frames;
  for (const auto& entry : doc.at("frames")) {
    CameraFrame f;
    f.fov_x = fov;
    const std::string file_path = entry.at("file_path").get<std::string>();
    f.name = std::filesystem::path(file_path).filename().string();
    f.transform = transform_from_json(entry.at("transform_matrix"));

    ImageRgb8 img = read_png_rgb8(dir / (file_path + ".png"));
    f.width = img.width;
    f.height = img.height;
    f.image = std::move(img.pixels);
    f.validate();

    const std::filesystem::path depth_path = dir / (file_path + "_depth.pfm");
    if (std::filesystem::exists(depth_path)) {
      ImageF32 depth = read_pfm(depth_path);
      if (depth.width != f.width || depth.height != f.height) {
        throw DataError("dataset: depth size mismatch for frame '" + f.name + "'");
      }
      f.gt_depth.assign(depth.pixels.begin(), depth.pixels.end());
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace

const std::vector<CameraFrame>& Dataset::split(std::string_view name) const {
  if (name == "background") return background;
  if (name == "eval") return eval;
  throw ConfigError("dataset: unknown split '" + std::string(name) +
                    "' (expected background or eval)");
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "images");
  save_split(dataset.background, "background", dir);
  save_split(dataset.eval, "eval", dir);

  nlohmann::json meta;
  meta["scene_name"] = dataset.meta.scene_name;
  meta["scene_box"] = {{"min", vec3_to_json(dataset.meta.scene_box.min)},
                       {"max", vec3_to_json(dataset.meta.scene_box.max)}};
  meta["white_background"] = dataset.meta.white_background;
  meta["background_color"] = vec3_to_json(dataset.meta.background_color);
  meta["t_near"] = dataset.meta.t_near;
  meta["t_far"] = dataset.meta.t_far;
  if (dataset.meta.added_bbox) {
    meta["added_bbox"] = {{"min", vec3_to_json(dataset.meta.added_bbox->min)},
                          {"max", vec3_to_json(dataset.meta.added_bbox->max)}};
  }
  std::ofstream out(dir / "meta.json");
  out << meta.dump(2) << "\n";
  if (!out) throw DataError("dataset: cannot write meta.json");
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset ds;
  const std::filesystem::path meta_path = dir / "meta.json";
  std::ifstream in(meta_path);
  if (!in) throw DataError("dataset: missing '" + meta_path.string() + "'");
  nlohmann::json meta;
  try {
    in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("dataset: bad JSON in meta.json: " + std::string(e.what()));
  }
  ds.meta.scene_name = meta.value("scene_name", "");
  if (meta.contains("scene_box")) {
    ds.meta.scene_box = Aabb{vec3_from_json(meta.at("scene_box").at("min")),
                             vec3_from_json(meta.at("scene_box").at("max"))};
  }
  ds.meta.white_background = meta.value("white_background", true);
  if (meta.contains("background_color")) {
    ds.meta.background_color = vec3_from_json(meta.at("background_color"));
  }
  ds.meta.t_near = meta.value("t_near", ds.meta.t_near);
  ds.meta.t_far = meta.value("t_far", ds.meta.t_far);
  if (meta.contains("added_bbox")) {
    ds.meta.added_bbox = Aabb{vec3_from_json(meta.at("added_bbox").at("min")),
                              vec3_from_json(meta.at("added_bbox").at("max"))};
  }

  ds.background = load_split("background", dir);
  ds.eval = load_split("eval", dir);
  return ds;
}

}  // namespace resnerf
