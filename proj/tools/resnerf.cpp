// Copyright (c) 2026 resnerf contributors.
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Commands compose into the full pipeline:
//   generate -> train-background -> train-residual -> render-depth -> eval
// with no hidden state between steps; every run is reproducible from its
// config file and seed. Exit codes: 0 ok, 2 config/usage, 3 data, 4 numeric.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "resnerf/dataset.hpp"
#include "resnerf/errors.hpp"
#include "resnerf/experiment.hpp"
#include "resnerf/image_io.hpp"
#include "resnerf/metrics.hpp"
#include "resnerf/renderer.hpp"
#include "resnerf/scenes.hpp"
#include "resnerf/trainer.hpp"

namespace fs = std::filesystem;
using namespace resnerf;

namespace {

void apply_thread_env() {
  if (const char* env = std::getenv("RESNERF_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) Eigen::setNbThreads(n);
  }
}

std::string epoch_ckpt_name(const std::string& stem, int epoch) {
  char buf[80];
  std::snprintf(buf, sizeof buf, "%s_epoch_%04d.ckpt", stem.c_str(), epoch);
  return buf;
}

std::string m_tag(Real m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", double(m));
  std::string s = buf;
  for (char& c : s) {
    if (c == '.') c = 'p';
  }
  return s;
}

std::string depth_suffix(DepthMethod method, Real m) {
  return method == DepthMethod::kExpected ? std::string("expected")
                                          : "threshold_m" + m_tag(m);
}

bool dataset_has_gt(const Dataset& ds) {
  for (const CameraFrame& f : ds.eval) {
    if (f.gt_depth.empty()) return false;
  }
  return !ds.eval.empty();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

/// Owns the fields referenced by a render; view() hands out the pointer set.
struct LoadedBundle {
  RenderMode mode = RenderMode::kSingle;
  std::optional<RadianceField> single;
  std::optional<RadianceField> background;
  std::optional<RadianceField> residual;
  std::optional<MixField> mix;

  FieldBundle view() const {
    FieldBundle b;
    if (single) b.single = &*single;
    if (background) b.background = &*background;
    if (residual) b.residual = &*residual;
    if (mix) b.mix = &*mix;
    return b;
  }
};

nlohmann::json read_json_file(const fs::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw DataError(std::string(what) + ": cannot read '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string(what) + ": bad JSON in '" + path.string() + "': " + e.what());
  }
  return j;
}

LoadedBundle load_bundle_manifest(const fs::path& manifest_path) {
  const nlohmann::json j = read_json_file(manifest_path, "bundle");
  const fs::path dir = manifest_path.parent_path();
  LoadedBundle b;
  b.mode = render_mode_from_string(j.value("mode", ""));
  if (b.mode == RenderMode::kSingle) {
    b.single = RadianceField::from_checkpoint(
        load_checkpoint(resolve(dir, j.at("single").get<std::string>())));
  } else {
    b.background = RadianceField::from_checkpoint(
        load_checkpoint(resolve(dir, j.at("background").get<std::string>())));
    b.background->set_frozen(true);
    b.residual = RadianceField::from_checkpoint(
        load_checkpoint(resolve(dir, j.at("residual").get<std::string>())));
    if (b.mode == RenderMode::kResidual) {
      b.mix = MixField::from_checkpoint(
          load_checkpoint(resolve(dir, j.at("mix").get<std::string>())));
    }
  }
  return b;
}

void write_bundle_manifest(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out) throw DataError("bundle: cannot write '" + path.string() + "'");
}

// ---- flag plumbing --------------------------------------------------------

struct TrainFlags {
  std::string config_path;
  std::string dataset;
  std::string output;
  std::optional<int> epochs;
  std::optional<int> rays_per_batch;
  std::optional<int> n_samples;
  std::optional<int> checkpoint_every;
  std::optional<std::uint64_t> seed;
  std::optional<double> learning_rate;
  std::optional<double> learning_rate_table;
  std::optional<double> m;
  bool log_metrics = false;

  void add_to(CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config JSON; flags override it");
    sub->add_option("--dataset", dataset, "dataset directory");
    sub->add_option("--out", output, "output directory for this run");
    sub->add_option("--epochs", epochs, "training epochs");
    sub->add_option("--rays-per-batch", rays_per_batch, "rays per optimizer step");
    sub->add_option("--n-samples", n_samples, "samples per ray");
    sub->add_option("--checkpoint-every", checkpoint_every,
                    "dump epoch checkpoints every K epochs (0 = final only)");
    sub->add_option("--seed", seed, "top-level seed for all substreams");
    sub->add_option("--lr", learning_rate, "MLP learning rate");
    sub->add_option("--lr-table", learning_rate_table, "hash-table learning rate");
    sub->add_option("--m", m, "density threshold for logged depth metrics");
    sub->add_flag("--log-depth-metrics", log_metrics,
                  "score threshold depth against GT after every epoch");
  }

  /// File config (if any) overlaid with the flags; `stage` picks which
  /// TrainConfig the per-stage flags land on.
  ExperimentConfig resolve_config(TrainConfig ExperimentConfig::*stage) const {
    ExperimentConfig cfg =
        config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(config_path);
    if (!dataset.empty()) cfg.dataset = dataset;
    if (!output.empty()) cfg.output = output;
    if (m) cfg.m = Real(*m);
    if (n_samples) cfg.n_samples = *n_samples;
    if (seed) {
      cfg.seed = *seed;
      cfg.stage_background.seed = *seed;
      cfg.stage_residual.seed = *seed;
    }
    TrainConfig& tc = cfg.*stage;
    if (epochs) tc.epochs = *epochs;
    if (rays_per_batch) tc.rays_per_batch = *rays_per_batch;
    if (n_samples) tc.n_samples = *n_samples;
    if (checkpoint_every) tc.checkpoint_every = *checkpoint_every;
    if (learning_rate) tc.learning_rate = Real(*learning_rate);
    if (learning_rate_table) tc.learning_rate_table = Real(*learning_rate_table);
    cfg.validate();
    if (cfg.dataset.empty()) throw ConfigError("no dataset given (--dataset or config)");
    if (cfg.output.empty()) throw ConfigError("no output directory given (--out or config)");
    return cfg;
  }

  void copy_config_into(const ExperimentConfig& cfg) const {
    const fs::path dst = cfg.output / "config.json";
    if (config_path.empty()) {
      cfg.save(dst);
    } else {
      fs::copy_file(config_path, dst, fs::copy_options::overwrite_existing);
    }
  }
};

void print_epoch(const EpochLog& log) {
  std::cout << "epoch " << log.epoch << "  loss " << log.loss;
  if (log.rmse) std::cout << "  rmse " << *log.rmse;
  if (log.mae) std::cout << "  mae " << *log.mae;
  std::cout << "  (" << log.wall_seconds << "s)\n";
  std::cout.flush();
}

void write_metric_curve(const fs::path& path, const std::vector<EpochLog>& log) {
  std::vector<CurveRow> rows;
  for (const EpochLog& l : log) {
    if (l.rmse && l.mae) {
      rows.push_back(CurveRow{l.epoch, l.wall_seconds, *l.rmse, *l.mae});
    }
  }
  if (!rows.empty()) write_curve_csv(path, rows);
}

// ---- commands -------------------------------------------------------------

struct GenerateOpts {
  std::string scene;
  std::string out;
  std::uint64_t seed = 1;
  GenerateCounts counts;
};

void cmd_generate(const GenerateOpts& o) {
  const BuiltinScene spec = builtin_scene(o.scene);
  const Dataset ds = generate_dataset(spec.background, spec.eval, o.counts, o.seed, o.out);
  std::cout << "scene " << o.scene << ": wrote " << ds.background.size() << " background + "
            << ds.eval.size() << " eval frames (" << o.counts.width << "x" << o.counts.height
            << ") to " << o.out << "\n";
}

struct TrainBgOpts {
  TrainFlags flags;
  std::string mode = "background";
};

void cmd_train_background(const TrainBgOpts& o) {
  const TrainMode mode = train_mode_from_string(o.mode);
  if (mode != TrainMode::kBackground && mode != TrainMode::kScratch) {
    throw ConfigError("train-background: --mode must be 'background' or 'scratch'");
  }
  ExperimentConfig cfg = o.flags.resolve_config(&ExperimentConfig::stage_background);
  TrainConfig tc = cfg.stage_background;
  tc.mode = mode;

  const Dataset ds = load_dataset(cfg.dataset);
  fs::create_directories(cfg.output);
  o.flags.copy_config_into(cfg);

  const std::string stem = mode == TrainMode::kScratch ? "scratch" : "background";
  RadianceField field = RadianceField::create(cfg.field, tc.seed, stem);
  FieldBundle bundle;
  bundle.single = &field;

  const bool metrics_on = o.flags.log_metrics && dataset_has_gt(ds);
  if (o.flags.log_metrics && !metrics_on) {
    std::cout << "notice: dataset provides no GT depth; per-epoch metrics disabled\n";
  }
  EpochHook hook = [&](int epoch, EpochLog& log) {
    if (metrics_on) {
      EvalDepthOptions eo;
      eo.m = cfg.m;
      eo.render.n_samples = cfg.n_samples;
      eo.render.white_background = ds.meta.white_background;
      const MetricReport rep = evaluate_depth(stem, bundle, RenderMode::kSingle, ds, eo);
      log.rmse = rep.rmse;
      log.mae = rep.mae;
    }
    if (tc.checkpoint_every > 0 && (epoch + 1) % tc.checkpoint_every == 0) {
      save_checkpoint(field.to_checkpoint(), cfg.output / epoch_ckpt_name(stem, epoch));
    }
    print_epoch(log);
  };

  const TrainResult result = mode == TrainMode::kScratch
                                 ? train_scratch(field, ds, tc, hook)
                                 : train_background(field, ds, tc, hook);

  save_checkpoint(field.to_checkpoint(), cfg.output / (stem + ".ckpt"));
  write_train_log_csv(cfg.output / (stem + "_train_log.csv"), result.log);
  write_metric_curve(cfg.output / "metric_curve.csv", result.log);
  write_bundle_manifest(cfg.output / "bundle.json",
                        {{"mode", "single"}, {"single", stem + ".ckpt"}});
  std::cout << stem << " training done: " << result.steps << " steps over "
            << result.train_pixels << " pixels, final loss " << result.log.back().loss
            << "\n";
}

struct TrainResOpts {
  TrainFlags flags;
  std::string background_ckpt;
  std::string mode = "residual";
};

void cmd_train_residual(const TrainResOpts& o) {
  std::string mode_name = o.mode == "naive" ? "naive_residual" : o.mode;
  const TrainMode mode = train_mode_from_string(mode_name);
  if (mode != TrainMode::kResidual && mode != TrainMode::kNaiveResidual) {
    throw ConfigError("train-residual: --mode must be 'residual' or 'naive'");
  }
  const bool naive = mode == TrainMode::kNaiveResidual;
  if (!fs::exists(o.background_ckpt)) {
    throw DataError("train-residual: background checkpoint '" + o.background_ckpt +
                    "' does not exist");
  }
  ExperimentConfig cfg = o.flags.resolve_config(&ExperimentConfig::stage_residual);
  TrainConfig tc = cfg.stage_residual;
  tc.mode = mode;

  const Dataset ds = load_dataset(cfg.dataset);
  fs::create_directories(cfg.output);
  o.flags.copy_config_into(cfg);

  RadianceField background = RadianceField::from_checkpoint(load_checkpoint(o.background_ckpt));
  background.set_frozen(true);
  RadianceField residual = RadianceField::create(cfg.field, tc.seed, "residual");
  std::optional<MixField> mix;
  if (!naive) mix.emplace(MixField::create(cfg.mix, tc.seed, "mix"));

  FieldBundle bundle;
  bundle.background = &background;
  bundle.residual = &residual;
  if (mix) bundle.mix = &*mix;
  const RenderMode rm = naive ? RenderMode::kNaive : RenderMode::kResidual;

  const bool metrics_on = o.flags.log_metrics && dataset_has_gt(ds);
  if (o.flags.log_metrics && !metrics_on) {
    std::cout << "notice: dataset provides no GT depth; per-epoch metrics disabled\n";
  }
  EpochHook hook = [&](int epoch, EpochLog& log) {
    if (metrics_on) {
      EvalDepthOptions eo;
      eo.m = cfg.m;
      eo.render.n_samples = cfg.n_samples;
      eo.render.white_background = ds.meta.white_background;
      const MetricReport rep = evaluate_depth(to_string(mode), bundle, rm, ds, eo);
      log.rmse = rep.rmse;
      log.mae = rep.mae;
    }
    if (tc.checkpoint_every > 0 && (epoch + 1) % tc.checkpoint_every == 0) {
      save_checkpoint(residual.to_checkpoint(),
                      cfg.output / epoch_ckpt_name("residual", epoch));
      if (mix) {
        save_checkpoint(mix->to_checkpoint(), cfg.output / epoch_ckpt_name("mix", epoch));
      }
    }
    print_epoch(log);
  };

  const TrainResult result =
      train_residual(residual, mix ? &*mix : nullptr, background, ds, tc, hook);

  save_checkpoint(residual.to_checkpoint(), cfg.output / "residual.ckpt");
  nlohmann::json manifest = {{"mode", naive ? "naive" : "residual"},
                             {"background", fs::absolute(o.background_ckpt).string()},
                             {"residual", "residual.ckpt"}};
  if (mix) {
    save_checkpoint(mix->to_checkpoint(), cfg.output / "mix.ckpt");
    manifest["mix"] = "mix.ckpt";
  }
  write_train_log_csv(cfg.output / (mode_name + "_train_log.csv"), result.log);
  write_metric_curve(cfg.output / "metric_curve.csv", result.log);
  write_bundle_manifest(cfg.output / "bundle.json", manifest);
  std::cout << mode_name << " training done: " << result.steps << " steps over "
            << result.train_pixels << " pixels, final loss " << result.log.back().loss
            << "\n";
}

struct RenderDepthOpts {
  std::string bundle_path;
  std::string checkpoint;
  std::string dataset;
  std::string out;
  std::string method = "threshold";
  std::string split = "eval";
  double m = 3.0;
  int n_samples = 128;
  int limit = 0;
  bool rgb = false;
};

void cmd_render_depth(const RenderDepthOpts& o) {
  if (o.bundle_path.empty() == o.checkpoint.empty()) {
    throw ConfigError("render-depth: give exactly one of --bundle or --checkpoint");
  }
  LoadedBundle lb;
  if (!o.bundle_path.empty()) {
    lb = load_bundle_manifest(o.bundle_path);
  } else {
    lb.mode = RenderMode::kSingle;
    lb.single = RadianceField::from_checkpoint(load_checkpoint(o.checkpoint));
  }
  const Dataset ds = load_dataset(o.dataset);
  const std::vector<CameraFrame>& frames = ds.split(o.split);
  const DepthMethod method = depth_method_from_string(o.method);
  RenderOptions ro;
  ro.n_samples = o.n_samples;
  ro.white_background = ds.meta.white_background;

  fs::create_directories(o.out);
  const std::string suffix = depth_suffix(method, Real(o.m));
  const FieldBundle bundle = lb.view();
  int written = 0;
  for (const CameraFrame& frame : frames) {
    if (o.limit > 0 && written >= o.limit) break;
    const DepthMap map =
        render_depth_map(frame, bundle, lb.mode, ro, ds.meta.scene_box, ds.meta.t_near,
                         ds.meta.t_far, method, Real(o.m));
    write_depth_outputs(fs::path(o.out) / (frame.name + "_" + suffix), map, ds.meta.t_far);
    if (o.rgb) {
      const RenderedImage img = render_image(frame, bundle, lb.mode, ro, ds.meta.scene_box,
                                             ds.meta.t_near, ds.meta.t_far);
      ImageRgb8 png;
      png.width = img.width;
      png.height = img.height;
      png.pixels.resize(img.rgb.size());
      for (std::size_t i = 0; i < img.rgb.size(); ++i) {
        png.pixels[i] = static_cast<std::uint8_t>(
            std::lround(std::clamp(img.rgb[i], Real(0), Real(1)) * 255));
      }
      write_png_rgb8(fs::path(o.out) / (frame.name + "_render.png"), png);
    }
    ++written;
  }
  std::cout << "wrote " << written << " depth maps (suffix '" << suffix << "') to " << o.out
            << "\n";
}

struct EvalOpts {
  std::string pred_dir;
  std::string dataset;
  std::string out;
  std::vector<std::string> suffixes;
  double crop_dilate = 0.2;
  bool use_full_crop = false;
  bool heatmaps = false;
};

void cmd_eval(const EvalOpts& o) {
  const Dataset ds = load_dataset(o.dataset);
  if (!dataset_has_gt(ds)) {
    std::cout << "notice: dataset provides no GT depth; metrics skipped, the rendered "
                 "depth maps remain as qualitative output\n";
    return;
  }
  if (o.suffixes.empty()) throw ConfigError("eval: give at least one --suffix");
  fs::create_directories(o.out);

  std::vector<CropRect> crops;
  for (const CameraFrame& frame : ds.eval) {
    crops.push_back(!o.use_full_crop && ds.meta.added_bbox
                        ? auto_crop(frame, *ds.meta.added_bbox, Real(o.crop_dilate))
                        : full_crop(frame.width, frame.height));
  }

  std::vector<MetricReport> reports;
  for (const std::string& suffix : o.suffixes) {
    std::vector<DepthMap> maps;
    maps.reserve(ds.eval.size());
    for (const CameraFrame& frame : ds.eval) {
      maps.push_back(read_depth_outputs(fs::path(o.pred_dir) / (frame.name + "_" + suffix)));
    }
    MetricReport rep = depth_report(suffix, maps, ds.eval, crops);
    if (rep.mae > rep.rmse * (1 + Real(1e-6)) + Real(1e-9)) {
      throw DataError("eval: metric invariant violated (MAE > RMSE) for '" + suffix + "'");
    }
    std::cout << suffix << ": mae " << rep.mae << "  rmse " << rep.rmse << "  n " << rep.n
              << "  holes " << rep.holes << "\n";
    if (o.heatmaps) {
      for (std::size_t i = 0; i < maps.size(); ++i) {
        write_error_heatmap(
            fs::path(o.out) / ("heatmap_" + ds.eval[i].name + "_" + suffix + ".png"),
            maps[i], ds.eval[i].gt_depth);
      }
    }
    std::ofstream json_out(fs::path(o.out) / ("metrics_" + suffix + ".json"));
    json_out << report_to_json(rep).dump(2) << "\n";
    reports.push_back(std::move(rep));
  }
  write_metrics_csv(fs::path(o.out) / "metrics.csv", reports);
  if (reports.size() > 1) {
    const MethodComparison cmp = compare_methods(reports, reports.front().method);
    write_comparison_csv(fs::path(o.out) / "comparison.csv", cmp);
    std::ofstream json_out(fs::path(o.out) / "comparison.json");
    json_out << comparison_to_json(cmp).dump(2) << "\n";
  }
}

struct CurveOpts {
  std::string run_dir;
  std::string dataset;
  std::string out_csv;
  std::string method = "threshold";
  double m = 3.0;
  int n_samples = 128;
};

void cmd_curve(const CurveOpts& o) {
  const fs::path run(o.run_dir);
  const nlohmann::json manifest = read_json_file(run / "bundle.json", "curve");
  const RenderMode mode = render_mode_from_string(manifest.value("mode", ""));
  const std::string stem =
      mode == RenderMode::kSingle
          ? fs::path(manifest.at("single").get<std::string>()).stem().string()
          : "residual";

  std::vector<std::pair<int, fs::path>> epochs;
  const std::string prefix = stem + "_epoch_";
  for (const auto& entry : fs::directory_iterator(run)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ".ckpt") {
      epochs.emplace_back(std::stoi(name.substr(prefix.size())), entry.path());
    }
  }
  if (epochs.empty()) {
    throw DataError("curve: no epoch checkpoints in '" + o.run_dir +
                    "' (train with --checkpoint-every)");
  }
  std::sort(epochs.begin(), epochs.end());
  for (std::size_t i = 1; i < epochs.size(); ++i) {
    if (epochs[i].first == epochs[i - 1].first) {
      throw ConfigError("curve: duplicate checkpoints for epoch " +
                        std::to_string(epochs[i].first));
    }
  }

  const Dataset ds = load_dataset(o.dataset);
  if (!dataset_has_gt(ds)) throw DataError("curve: dataset provides no GT depth");

  std::optional<RadianceField> background;
  if (mode != RenderMode::kSingle) {
    background = RadianceField::from_checkpoint(
        load_checkpoint(resolve(run, manifest.at("background").get<std::string>())));
    background->set_frozen(true);
  }

  EvalDepthOptions eo;
  eo.method = depth_method_from_string(o.method);
  eo.m = Real(o.m);
  eo.render.n_samples = o.n_samples;
  eo.render.white_background = ds.meta.white_background;

  std::vector<CurveRow> rows;
  for (const auto& [epoch, path] : epochs) {
    LoadedBundle lb;
    lb.mode = mode;
    if (mode == RenderMode::kSingle) {
      lb.single = RadianceField::from_checkpoint(load_checkpoint(path));
    } else {
      lb.background = background;  // shares parameter storage
      lb.residual = RadianceField::from_checkpoint(load_checkpoint(path));
      if (mode == RenderMode::kResidual) {
        lb.mix = MixField::from_checkpoint(
            load_checkpoint(run / epoch_ckpt_name("mix", epoch)));
      }
    }
    const MetricReport rep = evaluate_depth(stem, lb.view(), mode, ds, eo);
    rows.push_back(CurveRow{epoch, 0, rep.rmse, rep.mae});
    std::cout << "epoch " << epoch << "  rmse " << rep.rmse << "  mae " << rep.mae << "\n";
  }
  write_curve_csv(o.out_csv, rows);
  std::cout << "wrote " << rows.size() << " curve rows to " << o.out_csv << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  apply_thread_env();

  CLI::App app{"transparent-object depth via a frozen background field plus a learned "
               "residual field and blend network"};
  app.require_subcommand(1);

  GenerateOpts gen;
  CLI::App* sub_gen = app.add_subcommand("generate", "raytrace a built-in scene to a dataset");
  sub_gen->add_option("--scene", gen.scene, "A, B, or C")->required();
  sub_gen->add_option("--out", gen.out, "output dataset directory")->required();
  sub_gen->add_option("--seed", gen.seed, "pose sampling seed");
  sub_gen->add_option("--background-frames", gen.counts.background_frames, "background split size");
  sub_gen->add_option("--eval-frames", gen.counts.eval_frames, "evaluation split size");
  sub_gen->add_option("--width", gen.counts.width, "image width");
  sub_gen->add_option("--height", gen.counts.height, "image height");
  sub_gen->add_option("--radius", gen.counts.camera_radius, "camera distance from origin");
  sub_gen->add_option("--fov", gen.counts.fov_x, "horizontal field of view (radians)");

  TrainBgOpts tbg;
  CLI::App* sub_tbg = app.add_subcommand(
      "train-background", "stage 1: fit a single field (background split, or --mode scratch "
                          "for the evaluation split baseline)");
  tbg.flags.add_to(sub_tbg);
  sub_tbg->add_option("--mode", tbg.mode, "background | scratch");

  TrainResOpts tres;
  CLI::App* sub_tres = app.add_subcommand(
      "train-residual", "stage 2: fit residual + blend fields against a frozen background");
  tres.flags.add_to(sub_tres);
  sub_tres->add_option("--background", tres.background_ckpt, "background checkpoint from stage 1")
      ->required();
  sub_tres->add_option("--mode", tres.mode, "residual | naive (additive, no blend network)");

  RenderDepthOpts rd;
  CLI::App* sub_rd = app.add_subcommand("render-depth", "render depth maps from checkpoints");
  sub_rd->add_option("--bundle", rd.bundle_path, "bundle.json written by a training run");
  sub_rd->add_option("--checkpoint", rd.checkpoint, "single-field checkpoint");
  sub_rd->add_option("--dataset", rd.dataset, "dataset directory (poses)")->required();
  sub_rd->add_option("--out", rd.out, "output directory")->required();
  sub_rd->add_option("--method", rd.method, "threshold | expected (expected ignores --m)");
  sub_rd->add_option("--m", rd.m, "density threshold");
  sub_rd->add_option("--split", rd.split, "background | eval");
  sub_rd->add_option("--n-samples", rd.n_samples, "samples per ray");
  sub_rd->add_option("--limit", rd.limit, "render at most this many frames (0 = all)");
  sub_rd->add_flag("--rgb", rd.rgb, "also write color renders");

  EvalOpts ev;
  CLI::App* sub_ev = app.add_subcommand("eval", "score rendered depth maps against GT");
  sub_ev->add_option("--pred", ev.pred_dir, "directory holding rendered depth maps")->required();
  sub_ev->add_option("--dataset", ev.dataset, "dataset directory")->required();
  sub_ev->add_option("--out", ev.out, "report directory")->required();
  sub_ev->add_option("--suffix", ev.suffixes,
                     "depth file suffix (e.g. threshold_m3); repeat to compare methods");
  sub_ev->add_option("--crop-dilate", ev.crop_dilate, "object-crop dilation fraction");
  sub_ev->add_flag("--full-crop", ev.use_full_crop, "evaluate whole frames, not object crops");
  sub_ev->add_flag("--heatmaps", ev.heatmaps, "write |pred-gt| PNGs");

  CurveOpts cv;
  CLI::App* sub_cv = app.add_subcommand("curve", "metrics over a run's epoch checkpoints");
  sub_cv->add_option("--run", cv.run_dir, "training output directory")->required();
  sub_cv->add_option("--dataset", cv.dataset, "dataset directory")->required();
  sub_cv->add_option("--out", cv.out_csv, "output CSV path")->required();
  sub_cv->add_option("--method", cv.method, "threshold | expected");
  sub_cv->add_option("--m", cv.m, "density threshold");
  sub_cv->add_option("--n-samples", cv.n_samples, "samples per ray");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sub_gen->parsed()) cmd_generate(gen);
    if (sub_tbg->parsed()) cmd_train_background(tbg);
    if (sub_tres->parsed()) cmd_train_residual(tres);
    if (sub_rd->parsed()) cmd_render_depth(rd);
    if (sub_ev->parsed()) cmd_eval(ev);
    if (sub_cv->parsed()) cmd_curve(cv);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
