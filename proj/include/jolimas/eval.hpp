#pragma once

// Prediction error metric, the synthetic experiments and their outputs.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "jolimas/io.hpp"

namespace jolimas {

struct PredictionError {
  std::string frame_id;
  double percent = 0.0;
  std::vector<double> distances;  // per ray, pixels
  bool midpoint_anchor = true;    // false: anchor outside an ellipse, per-centre polar comparison used
};

// Rays at 2*pi*k/n from the midpoint of the two centres; per ray, the distance
// between the two boundary crossings. percent = 100 * mean / image diagonal.
// When the midpoint is not inside both ellipses, each ellipse's own polar
// boundary point at the same angle is compared instead.
PredictionError ellipse_error(const Ellipse& predicted, const Ellipse& detected, int width, int height, int rays = 36);
PredictionError ellipse_error(const PredictedSpecularity& pred, const SpecularObservation& det, int width,
                              int height, int rays = 36);

std::string metric_definition();

// Average ranks (ties share the mean rank), then Pearson on the ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

// Rasterised ellipse boundary, one pixel per sample, deterministic.
void draw_ellipse(ColorImage& img, const Ellipse& e, unsigned char r, unsigned char g, unsigned char b);
ColorImage overlay_image(const Image& image, const Ellipse* detected, const Ellipse* predicted);
// Grey image, detected ellipse in green, predicted ellipse in blue.
void emit_overlay(const Image& image, const PredictedSpecularity& pred, const SpecularObservation& det,
                  const std::filesystem::path& path);

struct FrameResult {
  std::string frame_id;
  int index = 0;  // position in the evaluated sequence
  double kappa = 0.0;
  ModelMode mode = ModelMode::Canonical;
  double percent = 0.0;  // NaN on failure
  int failed_directions = 0;
  double pb_error_px = 0.0;  // NaN on failure
  std::string failure;       // error text when percent is NaN
};

struct ModeSummary {
  double mean = 0.0;
  double max = 0.0;
  int evaluated = 0;
  int failed = 0;
};

struct ExperimentReport {
  std::string name;
  Json config;
  std::vector<FrameResult> frames;
  std::vector<std::string> notes;

  ModeSummary summary(ModelMode mode) const;
  // Mean percent per distinct kappa, ascending kappa; NaN-only groups skipped.
  std::vector<std::pair<double, double>> per_kappa_means(ModelMode mode) const;
  std::string csv() const;
  Json to_json() const;
};

struct ExperimentOptions {
  DetectConfig detect;
  PipelineConfig pipeline;
  std::optional<std::filesystem::path> out_dir;  // CSV, report and overlays when set
  int overlay_stride = 25;
};

ExperimentReport run_exp1(const MorphSequenceConfig& seq, const ExperimentOptions& opts);
ExperimentReport run_exp2(const MorphSequenceConfig& seq, const ExperimentOptions& opts);
ExperimentReport run_ellipsoid_experiment(const EllipsoidSequenceConfig& seq, const ExperimentOptions& opts);

// Rendered and detected morph sequence, shared between experiments.
struct PreparedFrame {
  CameraView view;
  double kappa = 0.0;
  int step = 0;
  Image image;
  std::optional<SpecularObservation> obs;
  std::string failure;
};

struct PreparedMorph {
  std::vector<MorphStep> steps;
  std::vector<std::vector<PreparedFrame>> frames;  // [step][view]
};

// Images are kept only for frames whose index is a multiple of keep_image_stride.
PreparedMorph prepare_morph(const MorphSequenceConfig& seq, const DetectConfig& detect, int keep_image_stride = 0);
ExperimentReport run_exp1(const PreparedMorph& data, const MorphSequenceConfig& seq, const ExperimentOptions& opts);
ExperimentReport run_exp2(const PreparedMorph& data, const MorphSequenceConfig& seq, const ExperimentOptions& opts);

// CSV + report.json (+ overlays emitted during the run) under `dir`.
void write_report(const ExperimentReport& report, const std::filesystem::path& dir);

}  // namespace jolimas
