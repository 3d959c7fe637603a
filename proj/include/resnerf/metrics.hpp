// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "resnerf/dataset.hpp"
#include "resnerf/renderer.hpp"

namespace resnerf {

struct FrameMetrics {
  std::string frame;
  Real mae = 0;
  Real rmse = 0;
  std::int64_t n = 0;           // evaluated pixels
  std::int64_t holes = 0;       // invalid predictions, scored at the t_far fallback
  std::int64_t skipped_gt = 0;  // pixels without a finite GT depth, excluded
};

/// Aggregate values pool every evaluated pixel across frames before the mean,
/// so frames with larger crops weigh more.
struct MetricReport {
  std::string method;
  int epoch = -1;
  Real wall_seconds = 0;
  Real mae = 0;
  Real rmse = 0;
  std::int64_t n = 0;
  std::int64_t holes = 0;
  std::int64_t skipped_gt = 0;
  std::vector<FrameMetrics> frames;
};

/// Pixelwise |pred - gt| statistics over the crop. gt must hold width*height
/// row-major entries; infinite entries mark pixels with no surface and are
/// excluded (but counted). Throws DataError when the crop is empty, exceeds
/// the map, or covers no finite-GT pixel.
FrameMetrics frame_depth_metrics(std::string frame_name, const DepthMap& pred,
                                 std::span<const Real> gt, const CropRect& crop);

/// One prediction + crop per frame, in frame order; frames must carry GT
/// depth. Throws DimensionError on length mismatch.
MetricReport depth_report(std::string method, std::span<const DepthMap> pred,
                          std::span<const CameraFrame> frames, std::span<const CropRect> crops);

Real depth_mae(std::span<const DepthMap> pred, std::span<const CameraFrame> frames,
               std::span<const CropRect> crops);
Real depth_rmse(std::span<const DepthMap> pred, std::span<const CameraFrame> frames,
                std::span<const CropRect> crops);

CropRect full_crop(int width, int height);

/// Screen-space bounding rectangle of `box` dilated by `dilate` (fraction of
/// its extent per side), clamped to the frame. Falls back to the full frame
/// when a corner sits behind the camera; DataError when the whole box does
/// or the rectangle clamps to nothing.
CropRect auto_crop(const CameraFrame& frame, const Aabb& box, Real dilate = Real(0.2));

struct MethodComparison {
  struct Row {
    std::string method;
    Real mae = 0;
    Real rmse = 0;
    Real delta_mae = 0;   // relative to the baseline row, 0 for the baseline
    Real delta_rmse = 0;
  };
  std::string baseline;
  std::vector<Row> rows;
};

/// All runs must cover the same frames in the same order (DataError).
/// `baseline` names the run the deltas are measured against.
MethodComparison compare_methods(std::span<const MetricReport> runs, std::string_view baseline);

struct CurveRow {
  int epoch = 0;
  Real wall_seconds = 0;
  Real rmse = 0;
  Real mae = 0;
};

/// Rows must be strictly ascending in epoch (ConfigError).
void write_curve_csv(const std::filesystem::path& path, std::span<const CurveRow> rows);

void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricReport> reports);
void write_comparison_csv(const std::filesystem::path& path, const MethodComparison& cmp);

nlohmann::json report_to_json(const MetricReport& report);
nlohmann::json comparison_to_json(const MethodComparison& cmp);

/// |pred - gt| as an 8-bit grayscale PNG. max_error 0 autoscales to the
/// largest finite error; pixels without finite GT render black.
void write_error_heatmap(const std::filesystem::path& path, const DepthMap& pred,
                         std::span<const Real> gt, Real max_error = 0);

struct EvalDepthOptions {
  DepthMethod method = DepthMethod::kThreshold;
  Real m = Real(3.0);
  RenderOptions render;
  Real crop_dilate = Real(0.2);  // ignored when the dataset has no added_bbox
};

/// Renders a depth map per evaluation frame and scores it against GT. Crops
/// come from meta.added_bbox when present, otherwise the full frame.
MetricReport evaluate_depth(std::string method_label, const FieldBundle& bundle,
                            RenderMode mode, const Dataset& dataset,
                            const EvalDepthOptions& opt);

}  // namespace resnerf
