// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0

#include "resnerf/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "resnerf/errors.hpp"
#include "resnerf/image_io.hpp"

namespace resnerf {

namespace {

struct ErrorAccum {
  double abs_sum = 0;
  double sq_sum = 0;
  std::int64_t n = 0;
  std::int64_t holes = 0;
  std::int64_t skipped = 0;

  void add(const ErrorAccum& o) {
    abs_sum += o.abs_sum;
    sq_sum += o.sq_sum;
    n += o.n;
    holes += o.holes;
    skipped += o.skipped;
  }
  Real mae() const { return n ? Real(abs_sum / double(n)) : Real(0); }
  Real rmse() const { return n ? Real(std::sqrt(sq_sum / double(n))) : Real(0); }
};

ErrorAccum accumulate(const DepthMap& pred, std::span<const Real> gt, const CropRect& crop) {
  if (crop.x0 < 0 || crop.y0 < 0 || crop.x1 > pred.width || crop.y1 > pred.height ||
      crop.width() <= 0 || crop.height() <= 0) {
    throw DataError("metrics: crop outside the depth map or empty");
  }
  if (gt.size() != static_cast<std::size_t>(pred.width) * pred.height) {
    throw DimensionError("metrics: GT size does not match the depth map");
  }
  ErrorAccum acc;
  for (int y = crop.y0; y < crop.y1; ++y) {
    for (int x = crop.x0; x < crop.x1; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * pred.width + x;
      const Real g = gt[i];
      if (!std::isfinite(g)) {
        ++acc.skipped;
        continue;
      }
      if (!pred.valid[i]) ++acc.holes;
      const double e = std::abs(double(pred.depth[i]) - double(g));
      acc.abs_sum += e;
      acc.sq_sum += e * e;
      ++acc.n;
    }
  }
  if (acc.n == 0) throw DataError("metrics: crop covers no pixel with finite GT depth");
  return acc;
}

FrameMetrics to_frame_metrics(std::string name, const ErrorAccum& acc) {
  FrameMetrics fm;
  fm.frame = std::move(name);
  fm.mae = acc.mae();
  fm.rmse = acc.rmse();
  fm.n = acc.n;
  fm.holes = acc.holes;
  fm.skipped_gt = acc.skipped;
  return fm;
}

}  // namespace

FrameMetrics frame_depth_metrics(std::string frame_name, const DepthMap& pred,
                                 std::span<const Real> gt, const CropRect& crop) {
  return to_frame_metrics(std::move(frame_name), accumulate(pred, gt, crop));
}

MetricReport depth_report(std::string method, std::span<const DepthMap> pred,
                          std::span<const CameraFrame> frames,
                          std::span<const CropRect> crops) {
  if (pred.size() != frames.size() || pred.size() != crops.size()) {
    throw DimensionError("metrics: prediction, frame, and crop counts differ");
  }
  if (pred.empty()) throw DataError("metrics: no frames to evaluate");

  MetricReport report;
  report.method = std::move(method);
  ErrorAccum total;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (frames[i].gt_depth.empty()) {
      throw DataError("metrics: frame '" + frames[i].name + "' has no GT depth");
    }
    ErrorAccum acc = accumulate(pred[i], frames[i].gt_depth, crops[i]);
    report.frames.push_back(to_frame_metrics(frames[i].name, acc));
    total.add(acc);
  }
  report.mae = total.mae();
  report.rmse = total.rmse();
  report.n = total.n;
  report.holes = total.holes;
  report.skipped_gt = total.skipped;
  return report;
}

Real depth_mae(std::span<const DepthMap> pred, std::span<const CameraFrame> frames,
               std::span<const CropRect> crops) {
  return depth_report("mae", pred, frames, crops).mae;
}

Real depth_rmse(std::span<const DepthMap> pred, std::span<const CameraFrame> frames,
                std::span<const CropRect> crops) {
  return depth_report("rmse", pred, frames, crops).rmse;
}

CropRect full_crop(int width, int height) { return CropRect{0, 0, width, height}; }

CropRect auto_crop(const CameraFrame& frame, const Aabb& box, Real dilate) {
  frame.validate();
  const Aabb dil = box.dilated(dilate);
  const Mat3 rot = frame.transform.block<3, 3>(0, 0);
  const Vec3 cam_pos = frame.transform.block<3, 1>(0, 3);
  const Real f = (Real(frame.width) / 2) / std::tan(frame.fov_x / 2);

  Real x_min = kInf, x_max = -kInf, y_min = kInf, y_max = -kInf;
  bool any_behind = false, any_front = false;
  for (int i = 0; i < 8; ++i) {
    Vec3 corner((i & 1) ? dil.max.x() : dil.min.x(), (i & 2) ? dil.max.y() : dil.min.y(),
                (i & 4) ? dil.max.z() : dil.min.z());
    Vec3 cam = rot.transpose() * (corner - cam_pos);
    if (cam.z() >= Real(-1e-6)) {
      any_behind = true;
      continue;
    }
    any_front = true;
    const Real px = Real(frame.width) / 2 + f * cam.x() / -cam.z() - Real(0.5);
    const Real py = Real(frame.height) / 2 - f * cam.y() / -cam.z() - Real(0.5);
    x_min = std::min(x_min, px);
    x_max = std::max(x_max, px);
    y_min = std::min(y_min, py);
    y_max = std::max(y_max, py);
  }
  if (!any_front) throw DataError("auto_crop: box entirely behind the camera");
  if (any_behind) return full_crop(frame.width, frame.height);

  CropRect crop;
  crop.x0 = std::clamp(static_cast<int>(std::floor(x_min)), 0, frame.width);
  crop.y0 = std::clamp(static_cast<int>(std::floor(y_min)), 0, frame.height);
  crop.x1 = std::clamp(static_cast<int>(std::ceil(x_max)) + 1, 0, frame.width);
  crop.y1 = std::clamp(static_cast<int>(std::ceil(y_max)) + 1, 0, frame.height);
  if (crop.width() <= 0 || crop.height() <= 0) {
    throw DataError("auto_crop: box projects outside the frame");
  }
  return crop;
}

MethodComparison compare_methods(std::span<const MetricReport> runs, std::string_view baseline) {
  if (runs.empty()) throw DataError("compare_methods: no runs");
  const MetricReport* base = nullptr;
  for (const MetricReport& r : runs) {
    if (r.method == baseline) base = &r;
    if (r.frames.size() != runs.front().frames.size()) {
      throw DataError("compare_methods: runs cover different frame counts");
    }
    for (std::size_t i = 0; i < r.frames.size(); ++i) {
      if (r.frames[i].frame != runs.front().frames[i].frame) {
        throw DataError("compare_methods: runs cover different frames");
      }
    }
  }
  if (!base) {
    throw ConfigError("compare_methods: baseline '" + std::string(baseline) +
                      "' is not among the runs");
  }

  auto rel = [](Real v, Real ref) {
    if (ref == Real(0)) return v == Real(0) ? Real(0) : kInf;
    return (v - ref) / ref;
  };
  MethodComparison cmp;
  cmp.baseline = std::string(baseline);
  for (const MetricReport& r : runs) {
    MethodComparison::Row row;
    row.method = r.method;
    row.mae = r.mae;
    row.rmse = r.rmse;
    row.delta_mae = rel(r.mae, base->mae);
    row.delta_rmse = rel(r.rmse, base->rmse);
    cmp.rows.push_back(std::move(row));
  }
  return cmp;
}

void write_curve_csv(const std::filesystem::path& path, std::span<const CurveRow> rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].epoch <= rows[i - 1].epoch) {
      throw ConfigError("curve: epochs must be strictly ascending");
    }
  }
  std::ofstream out(path);
  if (!out) throw DataError("curve: cannot write '" + path.string() + "'");
  out << "epoch,wall_seconds,rmse,mae\n";
  for (const CurveRow& r : rows) {
    out << r.epoch << ',' << r.wall_seconds << ',' << r.rmse << ',' << r.mae << '\n';
  }
}

void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const MetricReport> reports) {
  std::ofstream out(path);
  if (!out) throw DataError("metrics: cannot write '" + path.string() + "'");
  out << "method,epoch,frame,mae,rmse,n,holes,skipped_gt\n";
  for (const MetricReport& rep : reports) {
    for (const FrameMetrics& fm : rep.frames) {
      out << rep.method << ',' << rep.epoch << ',' << fm.frame << ',' << fm.mae << ','
          << fm.rmse << ',' << fm.n << ',' << fm.holes << ',' << fm.skipped_gt << '\n';
    }
    out << rep.method << ',' << rep.epoch << ",ALL," << rep.mae << ',' << rep.rmse << ','
        << rep.n << ',' << rep.holes << ',' << rep.skipped_gt << '\n';
  }
}

void write_comparison_csv(const std::filesystem::path& path, const MethodComparison& cmp) {
  std::ofstream out(path);
  if (!out) throw DataError("metrics: cannot write '" + path.string() + "'");
  out << "method,mae,rmse,delta_mae_vs_" << cmp.baseline << ",delta_rmse_vs_" << cmp.baseline
      << "\n";
  for (const auto& row : cmp.rows) {
    out << row.method << ',' << row.mae << ',' << row.rmse << ',' << row.delta_mae << ','
        << row.delta_rmse << '\n';
  }
}

nlohmann::json report_to_json(const MetricReport& report) {
  nlohmann::json j;
  j["method"] = report.method;
  j["epoch"] = report.epoch;
  j["wall_seconds"] = report.wall_seconds;
  j["mae"] = report.mae;
  j["rmse"] = report.rmse;
  j["n"] = report.n;
  j["holes"] = report.holes;
  j["skipped_gt"] = report.skipped_gt;
  auto& frames = j["frames"] = nlohmann::json::array();
  for (const FrameMetrics& fm : report.frames) {
    frames.push_back({{"frame", fm.frame},
                      {"mae", fm.mae},
                      {"rmse", fm.rmse},
                      {"n", fm.n},
                      {"holes", fm.holes},
                      {"skipped_gt", fm.skipped_gt}});
  }
  return j;
}

nlohmann::json comparison_to_json(const MethodComparison& cmp) {
  nlohmann::json j;
  j["baseline"] = cmp.baseline;
  auto& rows = j["rows"] = nlohmann::json::array();
  for (const auto& row : cmp.rows) {
    rows.push_back({{"method", row.method},
                    {"mae", row.mae},
                    {"rmse", row.rmse},
                    {"delta_mae", row.delta_mae},
                    {"delta_rmse", row.delta_rmse}});
  }
  return j;
}

void write_error_heatmap(const std::filesystem::path& path, const DepthMap& pred,
                         std::span<const Real> gt, Real max_error) {
  if (gt.size() != static_cast<std::size_t>(pred.width) * pred.height) {
    throw DimensionError("heatmap: GT size does not match the depth map");
  }
  Real scale = max_error;
  if (scale <= 0) {
    for (std::size_t i = 0; i < gt.size(); ++i) {
      if (std::isfinite(gt[i])) scale = std::max(scale, std::abs(pred.depth[i] - gt[i]));
    }
    if (scale <= 0) scale = 1;
  }
  ImageRgb8 img;
  img.width = pred.width;
  img.height = pred.height;
  img.pixels.resize(gt.size() * 3, 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!std::isfinite(gt[i])) continue;
    const Real e = std::clamp(std::abs(pred.depth[i] - gt[i]) / scale, Real(0), Real(1));
    const auto v = static_cast<std::uint8_t>(std::lround(e * 255));
    img.pixels[i * 3] = v;
    img.pixels[i * 3 + 1] = v;
    img.pixels[i * 3 + 2] = v;
  }
  write_png_rgb8(path, img);
}

MetricReport evaluate_depth(std::string method_label, const FieldBundle& bundle,
                            RenderMode mode, const Dataset& dataset,
                            const EvalDepthOptions& opt) {
  if (dataset.eval.empty()) throw DataError("evaluate_depth: dataset has no eval frames");
  std::vector<DepthMap> maps;
  std::vector<CropRect> crops;
  maps.reserve(dataset.eval.size());
  crops.reserve(dataset.eval.size());
  for (const CameraFrame& frame : dataset.eval) {
    maps.push_back(render_depth_map(frame, bundle, mode, opt.render, dataset.meta.scene_box,
                                    dataset.meta.t_near, dataset.meta.t_far, opt.method,
                                    opt.m));
    crops.push_back(dataset.meta.added_bbox
                        ? auto_crop(frame, *dataset.meta.added_bbox, opt.crop_dilate)
                        : full_crop(frame.width, frame.height));
  }
  return depth_report(std::move(method_label), maps, dataset.eval, crops);
}

}  // namespace resnerf
