#pragma once

// Ellipsoid reconstruction from virtual cameras and specularity prediction for
// new viewpoints, in canonical (warped) and dual-baseline (unwarped) modes.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jolimas/canonical.hpp"

namespace jolimas {

enum class ModelMode { Canonical, DualBaseline };

std::string_view to_string(ModelMode mode);
ModelMode parse_mode(std::string_view text);  // "canonical" | "dual"; throws InvalidArgument

struct CanonicalView {
  std::string view_id;
  ProjectionMap virtual_camera;
  PlaneH tangent;
  Ellipse ellipse;  // in the virtual image
  Conic conic;
  double fit_rms = 0.0;
};

// Virtual camera mirrored across `plane`, conic fitted to the projections of
// points lying on that plane.
CanonicalView make_canonical_view(const std::string& view_id, const CameraView& view, const PlaneH& plane,
                                  std::span<const Vec3> plane_points);
CanonicalView make_canonical_view(const SpecularObservation& obs, const CanonicalContour& contour,
                                  const CameraView& view);

struct JolimasModel {
  DualQuadric q_star;  // unit Frobenius norm, q(3,3) < 0
  EllipsoidShape shape;
  ModelMode mode = ModelMode::Canonical;
  std::vector<std::string> source_view_ids;
  double residual = 0.0;  // smallest / second-smallest singular value
};

// Joint homogeneous solve for vech(Q*) and one scale per view. Throws
// DegenerateConfiguration for m < 3 or an ambiguous null space, NotAnEllipsoid
// when the solution does not decode.
JolimasModel reconstruct(std::span<const CanonicalView> views, ModelMode mode = ModelMode::Canonical,
                         double degeneracy_ratio = 10.0);

// vech ordering for symmetric 4x4 and 3x3 matrices (upper triangle, row-major).
Eigen::Matrix<double, 10, 1> vech(const Mat4& m);
Eigen::Matrix<double, 6, 1> vech(const Mat3& m);
Mat4 unvech4(const Eigen::Matrix<double, 10, 1>& v);

struct PipelineConfig {
  ModelMode mode = ModelMode::Canonical;
  WarpConfig warp;
  int light_passes = 2;
  int seed_grid = 64;
  double max_seed_alpha = 0.5;
  double degeneracy_ratio = 10.0;
};

struct ViewObservation {
  CameraView view;
  SpecularObservation obs;
};

struct ReconstructionReport {
  std::vector<std::string> used_views;
  std::vector<std::string> dropped_views;  // WarpFailed or NotAnEllipse
  std::vector<CanonicalView> canonical_views;
  std::vector<JolimasModel> passes;
};

// Full reconstruction from lifted observations. Canonical mode warps each
// contour to its tangent plane (pass 1 with the light from
// estimate_light_from_reflections, later passes with the light at the previous
// ellipsoid centre). Baseline mode
// back-projects the image contour onto the tangent plane instead.
// Least-squares meeting point of the view rays mirrored about N(P_B), all
// starting at P_B. nullopt when the rays are near parallel or the point lies
// behind one of them.
std::optional<Vec3> estimate_light_from_reflections(std::span<const ViewObservation> inputs,
                                                    double min_conditioning = 1e-4);

JolimasModel reconstruct_from_observations(const SurfaceModel& surface, std::span<const ViewObservation> inputs,
                                           const PipelineConfig& config, ReconstructionReport* report = nullptr);

struct PredictedSpecularity {
  std::string view_id;
  SurfacePoint pb;
  std::vector<Vec2> contour_img;
  Ellipse ellipse_img;
  int failed_directions = 0;
};

// Specular point for a light at `light` seen from the view. Throws
// NoVisibleReflection when the coarse search is further than max_seed_alpha.
SurfacePoint predict_brightest_point(const SurfaceModel& surface, const CameraView& view, const Vec3& light,
                                     int seed_grid = 64, double max_seed_alpha = 0.5);

PredictedSpecularity predict(const JolimasModel& model, const CameraView& view, const SurfaceModel& surface,
                             const PipelineConfig& config = {});
PredictedSpecularity predict_dual_baseline(const JolimasModel& model, const CameraView& view,
                                           const SurfaceModel& surface, const PipelineConfig& config = {});
// Dispatch on config.mode.
PredictedSpecularity predict_mode(const JolimasModel& model, const CameraView& view, const SurfaceModel& surface,
                                  const PipelineConfig& config);

// JSON model file. save -> load -> save is byte-identical.
std::string model_to_string(const JolimasModel& model);
JolimasModel model_from_string(const std::string& text, const std::string& origin = "<string>");
void save_model(const JolimasModel& model, const std::filesystem::path& path);
JolimasModel load_model(const std::filesystem::path& path);

}  // namespace jolimas
