#pragma once

// Specularity segmentation, contour extraction, brightest-point estimation and
// back-projection of the detection onto the surface.

#include <optional>
#include <string>
#include <vector>

#include "jolimas/image.hpp"
#include "jolimas/surfaces.hpp"

namespace jolimas {

struct Blob {
  std::vector<Eigen::Vector2i> pixels;  // 8-connected
  int min_u = 0, min_v = 0, max_u = 0, max_v = 0;

  int area() const { return int(pixels.size()); }
  bool touches_border(int width, int height) const {
    return min_u == 0 || min_v == 0 || max_u == width - 1 || max_v == height - 1;
  }
  Vec2 centroid() const;
};

struct DetectConfig {
  double threshold = 0.7;
  int min_area = 20;
  bool reject_clipped = true;
  double top_fraction = 0.05;  // brightest-point support, fraction of the blob's range
};

// Components of {I >= threshold}, largest first; throws NoSpecularity when none
// reaches min_area.
std::vector<Blob> segment(const Image& image, double threshold, int min_area = 20);

// Moore-neighbour boundary trace, integer pixel centres, closed (last pixel
// adjacent to the first), positive signed area in (u, v) coordinates.
std::vector<Eigen::Vector2i> trace_boundary(const Blob& blob);

// Boundary trace refined to the threshold crossing along each boundary
// pixel's outward intensity-gradient direction.
std::vector<Vec2> extract_contour(const Image& image, const Blob& blob, double threshold);

// Weighted centroid of the blob pixels within the top `top_fraction` of the
// blob's intensity range, weights measured above the cut.
Vec2 brightest_point(const Image& image, const Blob& blob, double top_fraction = 0.05);

// Index of the blob whose brightest point is nearest to `previous`.
std::size_t associate_blob(const Image& image, const std::vector<Blob>& blobs, const Vec2& previous,
                           double top_fraction = 0.05);

struct Detection {
  std::string view_id;
  Vec2 brightest_px = Vec2::Zero();
  std::vector<Vec2> contour_px;
  Ellipse ellipse;
  bool clipped = false;
};

// Segment, keep the largest blob (or the one nearest `previous`), trace and fit.
Detection detect_specularity(const Image& image, const std::string& view_id, const DetectConfig& config,
                             const std::optional<Vec2>& previous = std::nullopt);

struct SpecularObservation {
  std::string view_id;
  std::vector<Vec2> contour_px;
  Vec2 brightest_px = Vec2::Zero();
  Ellipse ellipse_img;
  SurfacePoint pb;
  std::vector<Vec3> contour_s;
};

// Back-project a detection onto the surface. Throws BackprojectionMiss when a
// ray misses S, ClippedObservation for border-touching blobs if configured.
SpecularObservation lift_detection(const CameraView& view, const SurfaceModel& surface, const Detection& det,
                                   const DetectConfig& config);

SpecularObservation lift_observation(const CameraView& view, const SurfaceModel& surface, const Image& image,
                                     const Blob& blob, const DetectConfig& config);

// detect_specularity followed by lift_detection.
SpecularObservation observe(const CameraView& view, const SurfaceModel& surface, const Image& image,
                            const DetectConfig& config);

}  // namespace jolimas
