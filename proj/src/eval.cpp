#include "jolimas/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace jolimas {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json pipeline_json(const PipelineConfig& p) {
  return Json{{"warp", to_json(p.warp)},
              {"light_passes", p.light_passes},
              {"seed_grid", p.seed_grid},
              {"max_seed_alpha", p.max_seed_alpha},
              {"degeneracy_ratio", p.degeneracy_ratio}};
}

Json options_json(const ExperimentOptions& o) {
  return Json{{"detect", to_json(o.detect)}, {"pipeline", pipeline_json(o.pipeline)}, {"overlay_stride", o.overlay_stride}};
}

bool wants_overlay(const ExperimentOptions& opts, int index) {
  return opts.out_dir && opts.overlay_stride > 0 && index % opts.overlay_stride == 0;
}

std::optional<SpecularObservation> observe_frame(const Scene& scene, const CameraView& view, const Image& img,
                                                 const DetectConfig& detect, std::string& failure) {
  try {
    return observe(view, scene.surface, img, detect);
  } catch (const Error& e) {
    failure = e.what();
    return std::nullopt;
  }
}

struct Evaluated {
  FrameResult result;
  std::optional<PredictedSpecularity> pred;
};

Evaluated evaluate_frame(const std::optional<JolimasModel>& model, const std::string& model_failure,
                         const CameraView& view, const SurfaceModel& surface,
                         const std::optional<SpecularObservation>& obs, const std::string& obs_failure,
                         ModelMode mode, const PipelineConfig& pipeline) {
  Evaluated ev;
  FrameResult& r = ev.result;
  r.frame_id = view.id;
  r.mode = mode;
  r.percent = kNaN;
  r.pb_error_px = kNaN;
  if (!obs) {
    r.failure = "detection: " + obs_failure;
    return ev;
  }
  if (!model) {
    r.failure = "reconstruction: " + model_failure;
    return ev;
  }
  try {
    PipelineConfig cfg = pipeline;
    cfg.mode = mode;
    PredictedSpecularity pred = predict_mode(*model, view, surface, cfg);
    const PredictionError err = ellipse_error(pred, *obs, view.width, view.height);
    r.percent = err.percent;
    r.failed_directions = pred.failed_directions;
    r.pb_error_px = (view.project(pred.pb.position) - obs->brightest_px).norm();
    ev.pred = std::move(pred);
  } catch (const Error& e) {
    r.failure = std::string("prediction: ") + e.what();
  }
  return ev;
}

std::pair<std::optional<JolimasModel>, std::string> try_reconstruct(const SurfaceModel& surface,
                                                                    const std::vector<ViewObservation>& inputs,
                                                                    ModelMode mode, const PipelineConfig& pipeline) {
  try {
    PipelineConfig cfg = pipeline;
    cfg.mode = mode;
    return {reconstruct_from_observations(surface, inputs, cfg), {}};
  } catch (const Error& e) {
    return {std::nullopt, e.what()};
  }
}

void maybe_overlay(const ExperimentOptions& opts, int index, const Image& image, const Evaluated& ev,
                   const std::optional<SpecularObservation>& obs) {
  if (!wants_overlay(opts, index) || !ev.pred || !obs || image.data.empty()) return;
  const std::string name = "overlay_" + std::string(to_string(ev.result.mode)) + "_" + ev.result.frame_id + ".ppm";
  emit_overlay(image, *ev.pred, *obs, *opts.out_dir / name);
}

constexpr ModelMode kModes[2] = {ModelMode::Canonical, ModelMode::DualBaseline};

// Gaussian curvature of an ellipsoid at a surface point.
double ellipsoid_gaussian_curvature(const EllipsoidSurface& e, const Vec3& p) {
  const Vec3 q = e.rotation.transpose() * (p - e.center);
  const Vec3 a2 = e.axes.cwiseProduct(e.axes);
  const double s = q.x() * q.x() / (a2.x() * a2.x()) + q.y() * q.y() / (a2.y() * a2.y()) +
                   q.z() * q.z() / (a2.z() * a2.z());
  return 1.0 / (a2.x() * a2.y() * a2.z() * s * s);
}

}  // namespace

// ---------------------------------------------------------------- metric

PredictionError ellipse_error(const Ellipse& predicted, const Ellipse& detected, int width, int height, int rays) {
  PredictionError out;
  const double diag = std::hypot(double(width), double(height));
  const Vec2 anchor = 0.5 * (predicted.center + detected.center);
  out.midpoint_anchor = predicted.contains(anchor) && detected.contains(anchor);
  out.distances.reserve(std::size_t(rays));
  for (int k = 0; k < rays; ++k) {
    const double phi = 2.0 * std::numbers::pi * k / rays;
    double d = 0.0;
    if (out.midpoint_anchor) {
      const Vec2 dir(std::cos(phi), std::sin(phi));
      const auto sp = predicted.ray_exit(anchor, dir);
      const auto sd = detected.ray_exit(anchor, dir);
      d = (sp && sd) ? std::abs(*sp - *sd) : (predicted.polar_point(phi) - detected.polar_point(phi)).norm();
    } else {
      d = (predicted.polar_point(phi) - detected.polar_point(phi)).norm();
    }
    out.distances.push_back(d);
  }
  const double mean = std::accumulate(out.distances.begin(), out.distances.end(), 0.0) / double(rays);
  out.percent = 100.0 * mean / diag;
  return out;
}

PredictionError ellipse_error(const PredictedSpecularity& pred, const SpecularObservation& det, int width, int height,
                              int rays) {
  PredictionError e = ellipse_error(pred.ellipse_img, det.ellipse_img, width, height, rays);
  e.frame_id = det.view_id;
  return e;
}

std::string metric_definition() {
  return "percent_error = 100 * mean_k |r_pred(k) - r_det(k)| / image_diagonal, over 36 rays at angles 2*pi*k/36 "
         "from the midpoint of the predicted and detected ellipse centres, r = distance from the midpoint to the "
         "ellipse boundary along the ray; when the midpoint lies outside either ellipse, the distance between the "
         "two ellipses' own-centre polar boundary points at each angle is used";
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) return kNaN;
  const auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < idx.size();) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      const double avg = 0.5 * double(i + j) + 1.0;
      for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
      i = j + 1;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = double(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return kNaN;
  return sxy / std::sqrt(sxx * syy);
}

// ---------------------------------------------------------------- overlays

void draw_ellipse(ColorImage& img, const Ellipse& e, unsigned char r, unsigned char g, unsigned char b) {
  const int samples = std::max(64, int(std::ceil(2.0 * std::numbers::pi * std::max(e.a, e.b) * 4.0)));
  for (int k = 0; k < samples; ++k) {
    const Vec2 p = e.point_at(2.0 * std::numbers::pi * k / samples);
    if (!std::isfinite(p.x()) || !std::isfinite(p.y())) continue;
    img.set(int(std::lround(p.x())), int(std::lround(p.y())), r, g, b);
  }
}

ColorImage overlay_image(const Image& image, const Ellipse* detected, const Ellipse* predicted) {
  ColorImage out(image.width, image.height);
  for (int v = 0; v < image.height; ++v)
    for (int u = 0; u < image.width; ++u) {
      const auto g = static_cast<unsigned char>(std::lround(std::clamp(double(image.at(u, v)), 0.0, 1.0) * 255.0));
      out.set(u, v, g, g, g);
    }
  if (detected) draw_ellipse(out, *detected, 0, 255, 0);
  if (predicted) draw_ellipse(out, *predicted, 0, 0, 255);
  return out;
}

void emit_overlay(const Image& image, const PredictedSpecularity& pred, const SpecularObservation& det,
                  const fs::path& path) {
  write_ppm(overlay_image(image, &det.ellipse_img, &pred.ellipse_img), path);
}

// ---------------------------------------------------------------- reports

ModeSummary ExperimentReport::summary(ModelMode mode) const {
  ModeSummary s;
  double sum = 0.0;
  for (const auto& f : frames) {
    if (f.mode != mode) continue;
    if (std::isnan(f.percent)) {
      ++s.failed;
      continue;
    }
    ++s.evaluated;
    sum += f.percent;
    s.max = std::max(s.max, f.percent);
  }
  s.mean = s.evaluated ? sum / s.evaluated : kNaN;
  return s;
}

std::vector<std::pair<double, double>> ExperimentReport::per_kappa_means(ModelMode mode) const {
  std::map<double, std::pair<double, int>> acc;
  for (const auto& f : frames) {
    if (f.mode != mode || std::isnan(f.percent)) continue;
    auto& a = acc[f.kappa];
    a.first += f.percent;
    ++a.second;
  }
  std::vector<std::pair<double, double>> out;
  for (const auto& [k, a] : acc) out.emplace_back(k, a.first / a.second);
  return out;
}

std::string ExperimentReport::csv() const {
  std::string s = "frame_id,kappa,mode,percent_error,n_failed_directions,pb_error_px\n";
  for (const auto& f : frames) {
    s += f.frame_id + "," + fmt(f.kappa) + "," + std::string(to_string(f.mode)) + "," + fmt(f.percent) + "," +
         std::to_string(f.failed_directions) + "," + fmt(f.pb_error_px) + "\n";
  }
  return s;
}

Json ExperimentReport::to_json() const {
  Json out = Json::object();
  for (ModelMode mode : kModes) {
    const ModeSummary s = summary(mode);
    Json per_kappa = Json::array();
    for (const auto& [k, m] : per_kappa_means(mode)) per_kappa.push_back(Json::array({k, m}));
    out[std::string(to_string(mode))] = Json{{"mean_percent", number_or_null(s.mean)},
                                                 {"max_percent", s.max},
                                                 {"evaluated", s.evaluated},
                                                 {"failed", s.failed},
                                                 {"per_kappa_mean", per_kappa}};
  }
  const auto dual = per_kappa_means(ModelMode::DualBaseline);
  if (dual.size() >= 2) {
    std::vector<double> ks, ms;
    for (const auto& [k, m] : dual) {
      ks.push_back(k);
      ms.push_back(m);
    }
    out["spearman_dual_vs_kappa"] = number_or_null(spearman(ks, ms));
  }
  Json failures = Json::array();
  for (const auto& f : frames)
    if (std::isnan(f.percent))
      failures.push_back(Json{{"frame_id", f.frame_id}, {"mode", std::string(to_string(f.mode))}, {"error", f.failure}});
  return Json{{"experiment", name},
              {"metric", metric_definition()},
              {"config", config},
              {"notes", notes},
              {"summary", out},
              {"failures", failures}};
}

void write_report(const ExperimentReport& report, const fs::path& dir) {
  write_text_file(dir / (report.name + ".csv"), report.csv());
  write_text_file(dir / "report.json", report.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------- morph experiments

PreparedMorph prepare_morph(const MorphSequenceConfig& seq, const DetectConfig& detect, int keep_image_stride) {
  PreparedMorph data;
  data.steps = gen_plane_cylinder_sequence(seq);
  int index = 0;
  for (std::size_t s = 0; s < data.steps.size(); ++s) {
    const Scene& scene = data.steps[s].scene;
    std::vector<PreparedFrame> frames;
    for (const CameraView& view : scene.views) {
      PreparedFrame f;
      f.view = view;
      f.kappa = data.steps[s].kappa;
      f.step = int(s);
      Image img = render(scene, view);
      f.obs = observe_frame(scene, view, img, detect, f.failure);
      if (keep_image_stride > 0 && index % keep_image_stride == 0) f.image = std::move(img);
      frames.push_back(std::move(f));
      ++index;
    }
    data.frames.push_back(std::move(frames));
  }
  return data;
}

ExperimentReport run_exp1(const PreparedMorph& data, const MorphSequenceConfig& seq, const ExperimentOptions& opts) {
  ExperimentReport rep;
  rep.name = "exp1";
  rep.config = Json{{"sequence", to_json(seq)}, {"options", options_json(opts)}};
  rep.notes.push_back(
      "per-kappa reconstruction, leave-one-out: each view is predicted from a model reconstructed from the other "
      "views of the same kappa step");
  int index = 0;
  for (std::size_t s = 0; s < data.frames.size(); ++s) {
    const auto& frames = data.frames[s];
    const SurfaceModel& surface = data.steps[s].scene.surface;
    for (std::size_t j = 0; j < frames.size(); ++j, ++index) {
      std::vector<ViewObservation> inputs;
      for (std::size_t k = 0; k < frames.size(); ++k)
        if (k != j && frames[k].obs) inputs.push_back({frames[k].view, *frames[k].obs});
      for (ModelMode mode : kModes) {
        const auto [model, why] = try_reconstruct(surface, inputs, mode, opts.pipeline);
        Evaluated ev = evaluate_frame(model, why, frames[j].view, surface, frames[j].obs, frames[j].failure, mode,
                                      opts.pipeline);
        ev.result.kappa = frames[j].kappa;
        ev.result.index = index;
        maybe_overlay(opts, index, frames[j].image, ev, frames[j].obs);
        rep.frames.push_back(ev.result);
      }
    }
  }
  return rep;
}

ExperimentReport run_exp2(const PreparedMorph& data, const MorphSequenceConfig& seq, const ExperimentOptions& opts) {
  ExperimentReport rep;
  rep.name = "exp2";
  rep.config = Json{{"sequence", to_json(seq)}, {"options", options_json(opts)}};
  rep.notes.push_back("single reconstruction from every view of the kappa = 0 step, prediction on every frame");
  const auto& first = data.frames.front();
  std::vector<ViewObservation> inputs;
  for (const auto& f : first)
    if (f.obs) inputs.push_back({f.view, *f.obs});
  std::optional<JolimasModel> models[2];
  std::string why[2];
  for (int m = 0; m < 2; ++m) {
    auto r = try_reconstruct(data.steps.front().scene.surface, inputs, kModes[m], opts.pipeline);
    models[m] = std::move(r.first);
    why[m] = std::move(r.second);
  }
  int index = 0;
  for (std::size_t s = 0; s < data.frames.size(); ++s) {
    const SurfaceModel& surface = data.steps[s].scene.surface;
    for (const auto& f : data.frames[s]) {
      for (int m = 0; m < 2; ++m) {
        Evaluated ev =
            evaluate_frame(models[m], why[m], f.view, surface, f.obs, f.failure, kModes[m], opts.pipeline);
        ev.result.kappa = f.kappa;
        ev.result.index = index;
        maybe_overlay(opts, index, f.image, ev, f.obs);
        rep.frames.push_back(ev.result);
      }
      ++index;
    }
  }
  return rep;
}

ExperimentReport run_exp1(const MorphSequenceConfig& seq, const ExperimentOptions& opts) {
  const PreparedMorph data = prepare_morph(seq, opts.detect, opts.out_dir ? opts.overlay_stride : 0);
  ExperimentReport rep = run_exp1(data, seq, opts);
  if (opts.out_dir) write_report(rep, *opts.out_dir);
  return rep;
}

ExperimentReport run_exp2(const MorphSequenceConfig& seq, const ExperimentOptions& opts) {
  const PreparedMorph data = prepare_morph(seq, opts.detect, opts.out_dir ? opts.overlay_stride : 0);
  ExperimentReport rep = run_exp2(data, seq, opts);
  if (opts.out_dir) write_report(rep, *opts.out_dir);
  return rep;
}

// ---------------------------------------------------------------- ellipsoid experiment

ExperimentReport run_ellipsoid_experiment(const EllipsoidSequenceConfig& seq, const ExperimentOptions& opts) {
  ExperimentReport rep;
  rep.name = "exp_ellipsoid";
  rep.config = Json{{"sequence", to_json(seq)}, {"options", options_json(opts)}};
  rep.notes.push_back("reconstruction from the first cluster_frames frames, prediction on the remaining frames");
  rep.notes.push_back("kappa column: Gaussian curvature of the object at the detected brightest point");

  const Scene scene = gen_ellipsoid_sequence(seq);
  const auto& object = std::get<EllipsoidSurface>(scene.surface.variant());
  std::vector<ViewObservation> inputs;
  std::vector<std::optional<SpecularObservation>> observations;
  std::vector<std::string> failures;
  std::vector<Image> images;
  for (std::size_t k = 0; k < scene.views.size(); ++k) {
    const CameraView& view = scene.views[k];
    Image img = render(scene, view);
    std::string failure;
    auto obs = observe_frame(scene, view, img, opts.detect, failure);
    if (int(k) < seq.cluster_frames && obs) inputs.push_back({view, *obs});
    observations.push_back(std::move(obs));
    failures.push_back(failure);
    const int index = int(k) - seq.cluster_frames;
    images.push_back(index >= 0 && wants_overlay(opts, index) ? std::move(img) : Image{});
  }

  std::optional<JolimasModel> models[2];
  std::string why[2];
  for (int m = 0; m < 2; ++m) {
    auto r = try_reconstruct(scene.surface, inputs, kModes[m], opts.pipeline);
    models[m] = std::move(r.first);
    why[m] = std::move(r.second);
  }
  for (std::size_t k = std::size_t(seq.cluster_frames); k < scene.views.size(); ++k) {
    const int index = int(k) - seq.cluster_frames;
    const double curvature =
        observations[k] ? ellipsoid_gaussian_curvature(object, observations[k]->pb.position) : kNaN;
    for (int m = 0; m < 2; ++m) {
      Evaluated ev = evaluate_frame(models[m], why[m], scene.views[k], scene.surface, observations[k], failures[k],
                                    kModes[m], opts.pipeline);
      ev.result.kappa = curvature;
      ev.result.index = index;
      maybe_overlay(opts, index, images[k], ev, observations[k]);
      rep.frames.push_back(ev.result);
    }
  }
  if (opts.out_dir) write_report(rep, *opts.out_dir);
  return rep;
}

}  // namespace jolimas
