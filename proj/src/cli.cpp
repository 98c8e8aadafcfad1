#include "jolimas/cli.hpp"

#include <CLI11.hpp>
#include <iostream>
#include <map>
#include <sstream>

#include "jolimas/eval.hpp"

namespace jolimas {

namespace fs = std::filesystem;

namespace {

// Configuration problems map to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Overrides {
  std::optional<double> threshold;
  std::optional<int> directions;
  std::optional<double> step_fraction;
  std::optional<std::uint64_t> seed;
  std::optional<int> overlay_stride;

  Json to_json() const {
    Json j = Json::object();
    if (threshold) j["threshold"] = *threshold;
    if (directions) j["directions"] = *directions;
    if (step_fraction) j["step_fraction"] = *step_fraction;
    if (seed) j["seed"] = *seed;
    if (overlay_stride) j["overlay_stride"] = *overlay_stride;
    return j;
  }
};

struct Common {
  std::string config;
  std::string scene;
  std::string images;
  std::string model;
  std::string out;
  std::string mode = "canonical";
  std::string views;
  bool allow_clipped = false;
  Overrides ov;
};

template <typename F>
auto config_step(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

Json run_echo(const std::string& command, const Common& c) {
  return Json{{"command", command}, {"config", c.config}, {"scene", c.scene},  {"images", c.images},
              {"model", c.model},     {"out", c.out},       {"mode", c.mode},    {"views", c.views},
              {"overrides", c.ov.to_json()}};
}

void apply_overrides(const Overrides& ov, DetectConfig& detect, PipelineConfig& pipeline) {
  if (ov.threshold) detect.threshold = *ov.threshold;
  if (ov.directions) pipeline.warp.directions = *ov.directions;
  if (ov.step_fraction) pipeline.warp.step_fraction = *ov.step_fraction;
}

void validate_options(const DetectConfig& d, const PipelineConfig& p) {
  if (!(d.threshold > 0.0)) throw ConfigError("threshold must be positive");
  if (d.min_area < 1) throw ConfigError("min_area must be at least 1");
  if (p.warp.directions < 8) throw ConfigError("directions must be at least 8");
  if (!(p.warp.step_fraction > 0.0 && p.warp.step_fraction < 1.0))
    throw ConfigError("step_fraction must lie in (0, 1)");
  if (p.warp.min_directions < 5 || p.warp.min_directions > p.warp.directions)
    throw ConfigError("min_directions must lie in [5, directions]");
}

// Experiment config document: {"sequence", "detect", "warp", "pipeline", "overlay_stride"}.
struct ExperimentDoc {
  Json sequence = Json::object();
  ExperimentOptions opts;
};

ExperimentDoc load_experiment_doc(const Common& c) {
  ExperimentDoc doc;
  if (c.config.empty()) return doc;
  const fs::path path = c.config;
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path.string());
  const Json j = config_step([&] { return read_json_file(path); });
  const std::string ctx = path.string();
  config_step([&] {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, ctx + ": expected an object");
    for (const auto& [k, v] : j.items())
      if (k != "sequence" && k != "detect" && k != "warp" && k != "pipeline" && k != "overlay_stride")
        throw Error(ErrorCode::ParseError, ctx + ": unknown field '" + k + "'");
    if (j.contains("sequence")) doc.sequence = j["sequence"];
    if (j.contains("detect")) doc.opts.detect = detect_config_from_json(j["detect"], ctx + ".detect");
    if (j.contains("warp")) doc.opts.pipeline.warp = warp_config_from_json(j["warp"], ctx + ".warp");
    if (j.contains("pipeline")) {
      const Json& p = j["pipeline"];
      if (!p.is_object()) throw Error(ErrorCode::ParseError, ctx + ".pipeline: expected an object");
      for (const auto& [k, v] : p.items()) {
        if (!v.is_number()) throw Error(ErrorCode::ParseError, ctx + ".pipeline." + k + ": expected a number");
        if (k == "light_passes") doc.opts.pipeline.light_passes = v.get<int>();
        else if (k == "seed_grid") doc.opts.pipeline.seed_grid = v.get<int>();
        else if (k == "max_seed_alpha") doc.opts.pipeline.max_seed_alpha = v.get<double>();
        else if (k == "degeneracy_ratio") doc.opts.pipeline.degeneracy_ratio = v.get<double>();
        else throw Error(ErrorCode::ParseError, ctx + ".pipeline: unknown field '" + k + "'");
      }
    }
    if (j.contains("overlay_stride")) {
      if (!j["overlay_stride"].is_number_integer())
        throw Error(ErrorCode::ParseError, ctx + ".overlay_stride: expected an integer");
      doc.opts.overlay_stride = j["overlay_stride"].get<int>();
    }
    return 0;
  });
  return doc;
}

std::vector<std::string> split_ids(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(tok);
  return out;
}

std::vector<CameraView> select_views(const Scene& scene, const std::string& ids) {
  if (ids.empty()) return scene.views;
  std::vector<CameraView> out;
  for (const auto& id : split_ids(ids)) {
    const auto it = std::find_if(scene.views.begin(), scene.views.end(), [&](const auto& v) { return v.id == id; });
    if (it == scene.views.end()) throw ConfigError("view '" + id + "' is not in the scene");
    out.push_back(*it);
  }
  return out;
}

Scene load_scene_checked(const std::string& path) {
  if (path.empty()) throw ConfigError("--scene is required");
  if (!fs::exists(path)) throw ConfigError("scene file not found: " + path);
  return config_step([&] { return load_scene(path); });
}

Image load_view_image(const std::string& dir, const CameraView& view) {
  const fs::path p = fs::path(dir) / (view.id + ".pgm");
  Image img = read_pgm16(p);
  if (img.width != view.width || img.height != view.height)
    throw Error(ErrorCode::InvalidArgument, "image '" + p.string() + "' does not match the camera dimensions");
  return img;
}

DetectConfig detect_from(const Common& c) {
  DetectConfig d;
  if (c.ov.threshold) d.threshold = *c.ov.threshold;
  d.reject_clipped = !c.allow_clipped;
  return d;
}

PipelineConfig pipeline_from(const Common& c) {
  PipelineConfig p;
  p.mode = config_step([&] { return parse_mode(c.mode); });
  DetectConfig unused;
  apply_overrides(c.ov, unused, p);
  validate_options(detect_from(c), p);
  return p;
}

void require_out(const Common& c) {
  if (c.out.empty()) throw ConfigError("--out is required");
}

// ---------------------------------------------------------------- commands

int cmd_render(const Common& c) {
  require_out(c);
  const Scene scene = load_scene_checked(c.scene);
  config_step([&] {
    scene.material.validate();
    return 0;
  });
  const auto views = select_views(scene, c.views);
  for (const auto& v : views) write_pgm16(render(scene, v), fs::path(c.out) / (v.id + ".pgm"));
  return 0;
}

int cmd_detect(const Common& c) {
  require_out(c);
  if (c.images.empty()) throw ConfigError("--images is required");
  const Scene scene = load_scene_checked(c.scene);
  const DetectConfig detect = detect_from(c);
  Json dets = Json::array(), obs = Json::array(), failures = Json::array();
  for (const auto& v : select_views(scene, c.views)) {
    try {
      const Detection d = detect_specularity(load_view_image(c.images, v), v.id, detect);
      dets.push_back(to_json(d));
      obs.push_back(to_json(lift_detection(v, scene.surface, d, detect)));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError || e.code() == ErrorCode::ParseError) throw;
      failures.push_back(Json{{"view_id", v.id}, {"error", e.what()}});
    }
  }
  write_text_file(fs::path(c.out) / "detections.json",
                  Json{{"run", run_echo("detect", c)}, {"detect", to_json(detect)}, {"detections", dets},
                       {"observations", obs}, {"failures", failures}}
                          .dump(2) +
                      "\n");
  return failures.empty() ? 0 : 1;
}

int cmd_reconstruct(const Common& c) {
  require_out(c);
  if (c.images.empty()) throw ConfigError("--images is required");
  const Scene scene = load_scene_checked(c.scene);
  const PipelineConfig pipeline = pipeline_from(c);
  const DetectConfig detect = detect_from(c);
  std::vector<ViewObservation> inputs;
  for (const auto& v : select_views(scene, c.views))
    inputs.push_back({v, observe(v, scene.surface, load_view_image(c.images, v), detect)});
  ReconstructionReport rep;
  const JolimasModel model = reconstruct_from_observations(scene.surface, inputs, pipeline, &rep);
  save_model(model, fs::path(c.out) / "model.json");
  Json passes = Json::array();
  for (const auto& m : rep.passes)
    passes.push_back(Json{{"center", to_json(m.shape.center)}, {"axes", to_json(m.shape.axes)}, {"residual", m.residual}});
  write_text_file(fs::path(c.out) / "reconstruction.json",
                  Json{{"run", run_echo("reconstruct", c)},
                       {"used_views", rep.used_views},
                       {"dropped_views", rep.dropped_views},
                       {"passes", passes}}
                          .dump(2) +
                      "\n");
  return 0;
}

JolimasModel load_model_checked(const std::string& path) {
  if (path.empty()) throw ConfigError("--model is required");
  if (!fs::exists(path)) throw ConfigError("model file not found: " + path);
  return config_step([&] { return load_model(path); });
}

int cmd_predict(const Common& c) {
  require_out(c);
  const JolimasModel model = load_model_checked(c.model);
  const Scene scene = load_scene_checked(c.scene);
  const PipelineConfig pipeline = pipeline_from(c);
  Json preds = Json::array(), failures = Json::array();
  for (const auto& v : select_views(scene, c.views)) {
    try {
      preds.push_back(to_json(predict_mode(model, v, scene.surface, pipeline)));
    } catch (const Error& e) {
      failures.push_back(Json{{"view_id", v.id}, {"error", e.what()}});
    }
  }
  write_text_file(fs::path(c.out) / "predictions.json",
                  Json{{"run", run_echo("predict", c)}, {"predictions", preds}, {"failures", failures}}.dump(2) + "\n");
  return failures.empty() ? 0 : 1;
}

int cmd_evaluate(const Common& c) {
  require_out(c);
  if (c.images.empty()) throw ConfigError("--images is required");
  const JolimasModel model = load_model_checked(c.model);
  const Scene scene = load_scene_checked(c.scene);
  const PipelineConfig pipeline = pipeline_from(c);
  const DetectConfig detect = detect_from(c);
  ExperimentReport rep;
  rep.name = "evaluate";
  rep.config = Json{{"run", run_echo("evaluate", c)}, {"detect", to_json(detect)}, {"warp", to_json(pipeline.warp)}};
  int index = 0;
  for (const auto& v : select_views(scene, c.views)) {
    FrameResult r;
    r.frame_id = v.id;
    r.index = index++;
    r.mode = pipeline.mode;
    r.percent = std::numeric_limits<double>::quiet_NaN();
    r.pb_error_px = r.percent;
    try {
      const Image img = load_view_image(c.images, v);
      const SpecularObservation obs = observe(v, scene.surface, img, detect);
      const PredictedSpecularity pred = predict_mode(model, v, scene.surface, pipeline);
      r.percent = ellipse_error(pred, obs, v.width, v.height).percent;
      r.failed_directions = pred.failed_directions;
      r.pb_error_px = (v.project(pred.pb.position) - obs.brightest_px).norm();
      emit_overlay(img, pred, obs, fs::path(c.out) / ("overlay_" + std::string(to_string(pipeline.mode)) + "_" + v.id + ".ppm"));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::IoError) throw;
      r.failure = e.what();
    }
    rep.frames.push_back(r);
  }
  write_report(rep, c.out);
  return 0;
}

int cmd_experiment(const std::string& name, const Common& c) {
  require_out(c);
  ExperimentDoc doc = load_experiment_doc(c);
  apply_overrides(c.ov, doc.opts.detect, doc.opts.pipeline);
  if (c.ov.overlay_stride) doc.opts.overlay_stride = *c.ov.overlay_stride;
  validate_options(doc.opts.detect, doc.opts.pipeline);
  doc.opts.out_dir = fs::path(c.out);
  const std::string ctx = c.config.empty() ? "<defaults>" : c.config;

  ExperimentReport rep;
  if (name == "exp-ellipsoid") {
    const EllipsoidSequenceConfig seq =
        config_step([&] { return ellipsoid_config_from_json(doc.sequence, ctx + ".sequence"); });
    if (c.ov.seed) throw ConfigError("--seed has no effect on the ellipsoid sequence (no random view placement)");
    rep = run_ellipsoid_experiment(seq, doc.opts);
  } else {
    MorphSequenceConfig seq = config_step([&] { return morph_config_from_json(doc.sequence, ctx + ".sequence"); });
    if (c.ov.seed) seq.seed = *c.ov.seed;
    config_step([&] {
      if (seq.steps < 2 || seq.views_per_step < 3) throw Error(ErrorCode::InvalidArgument, "sequence too short");
      return 0;
    });
    const PreparedMorph data = prepare_morph(seq, doc.opts.detect, doc.opts.overlay_stride);
    rep = name == "exp1" ? run_exp1(data, seq, doc.opts) : run_exp2(data, seq, doc.opts);
  }
  rep.config["run"] = run_echo(name, c);
  write_report(rep, c.out);
  for (ModelMode mode : {ModelMode::Canonical, ModelMode::DualBaseline}) {
    const ModeSummary s = rep.summary(mode);
    std::cout << name << " " << to_string(mode) << ": mean " << s.mean << "% max " << s.max << "% over " << s.evaluated
              << " frames, " << s.failed << " failed\n";
  }
  return 0;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
  CLI::App app{"Specularity reconstruction and prediction on curved surfaces"};
  app.require_subcommand(1);
  Common c;
  std::string command;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", c.out, "Output directory");
    sub->add_option("--threshold", c.ov.threshold, "Segmentation threshold");
    sub->add_option("--directions", c.ov.directions, "Number of warp directions");
    sub->add_option("--step-fraction", c.ov.step_fraction, "Warp march step relative to the specularity diameter");
  };
  const auto add_scene = [&](CLI::App* sub) {
    sub->add_option("--scene", c.scene, "Scene JSON {surface, light, material, views, background}");
    sub->add_option("--views", c.views, "Comma-separated view ids (default: all)");
  };

  auto* render = app.add_subcommand("render", "Render scene views to 16-bit PGM images");
  add_scene(render);
  render->add_option("--out", c.out, "Output directory");

  auto* detect = app.add_subcommand("detect", "Detect and back-project specularities");
  add_scene(detect);
  add_common(detect);
  detect->add_option("--images", c.images, "Directory of <view_id>.pgm images");
  detect->add_flag("--allow-clipped", c.allow_clipped, "Keep specularities touching the image border");

  auto* reconstruct = app.add_subcommand("reconstruct", "Reconstruct the specularity ellipsoid");
  add_scene(reconstruct);
  add_common(reconstruct);
  reconstruct->add_option("--images", c.images, "Directory of <view_id>.pgm images");
  reconstruct->add_option("--mode", c.mode, "canonical | dual");
  reconstruct->add_flag("--allow-clipped", c.allow_clipped, "Keep specularities touching the image border");

  auto* predict = app.add_subcommand("predict", "Predict specularities for new views");
  add_scene(predict);
  add_common(predict);
  predict->add_option("--model", c.model, "Model JSON");
  predict->add_option("--mode", c.mode, "canonical | dual");

  auto* evaluate = app.add_subcommand("evaluate", "Compare predictions with detections");
  add_scene(evaluate);
  add_common(evaluate);
  evaluate->add_option("--model", c.model, "Model JSON");
  evaluate->add_option("--images", c.images, "Directory of <view_id>.pgm images");
  evaluate->add_option("--mode", c.mode, "canonical | dual");
  evaluate->add_flag("--allow-clipped", c.allow_clipped, "Keep specularities touching the image border");

  std::vector<CLI::App*> experiments;
  for (const char* name : {"exp1", "exp2", "exp-ellipsoid"}) {
    auto* sub = app.add_subcommand(name, std::string("Run the ") + name + " experiment");
    sub->add_option("--config", c.config, "Experiment JSON {sequence, detect, warp, pipeline, overlay_stride}");
    add_common(sub);
    sub->add_option("--seed", c.ov.seed, "Seed of the camera placement jitter");
    sub->add_option("--overlay-stride", c.ov.overlay_stride, "Write an overlay every N frames (0: none)");
    experiments.push_back(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "render") return cmd_render(c);
    if (name == "detect") return cmd_detect(c);
    if (name == "reconstruct") return cmd_reconstruct(c);
    if (name == "predict") return cmd_predict(c);
    if (name == "evaluate") return cmd_evaluate(c);
    return cmd_experiment(name, c);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace jolimas
