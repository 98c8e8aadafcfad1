#pragma once

// Limit angles and the warp between a specularity contour on the surface and
// its canonical counterpart on the tangent plane at the brightest point.

#include <optional>
#include <vector>

#include "jolimas/detect.hpp"
#include "jolimas/shading.hpp"

namespace jolimas {

// Light used to evaluate half-way vectors during warping. A point light is
// the usual case; a directional light stands in for the unknown source before
// a first reconstruction exists.
struct LightModel {
  Vec3 value = Vec3::Zero();  // position, or unit direction toward the light
  bool directional = false;

  static LightModel point(const Vec3& position) { return {position, false}; }
  static LightModel direction(const Vec3& towards_light) { return {towards_light.normalized(), true}; }
  // Mirror reflection of the view ray about the normal at `pb`.
  static LightModel mirror(const SurfacePoint& pb, const Vec3& camera_center);

  std::optional<Vec3> halfway(const Vec3& viewer, const Vec3& p) const;
};

// Incident angle at p for a point light L and camera centre C. Throws Degenerate.
double limit_angle_at(const SurfacePoint& p, const Vec3& light, const Vec3& camera_center);
// Same with a LightModel and an arbitrary normal; nullopt when degenerate.
std::optional<double> warp_alpha(const Vec3& normal, const Vec3& p, const LightModel& light,
                                 const Vec3& camera_center);

struct WarpConfig {
  int directions = 36;
  double step_fraction = 0.02;  // march step relative to the specularity major diameter
  int max_steps = 10000;
  int min_directions = 8;
};

// Orthonormal frame of T_PB(S): origin P_B, in-plane axes e1, e2. e1 points
// toward the camera's projection onto the plane so the fan moves with the scene.
struct TangentFrame {
  Vec3 origin = Vec3::Zero();
  Vec3 normal = Vec3::UnitZ();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();

  static TangentFrame at(const SurfacePoint& pb, const Vec3& camera_center);
  PlaneH plane() const { return PlaneH::from_point_normal(origin, normal); }
  Vec3 direction(double theta) const { return std::cos(theta) * e1 + std::sin(theta) * e2; }
  Vec2 to_plane(const Vec3& p) const { return {(p - origin).dot(e1), (p - origin).dot(e2)}; }
  Vec3 from_plane(const Vec2& q) const { return origin + q.x() * e1 + q.y() * e2; }
};

// Direction i of an n-fan, angle 2*pi*i/n from e1.
double fan_angle(int i, int n);

// Per-direction crossings of the surface contour, found by walking on S.
struct ContourCrossings {
  TangentFrame frame;
  double step = 0.0;
  std::vector<std::optional<SurfacePoint>> points;  // nullopt: StalledWalk or NoCrossing
  int failed() const;
};

ContourCrossings sample_contour_crossings(const SpecularObservation& obs, const SurfaceModel& surface,
                                          const Vec3& camera_center, const WarpConfig& config = {});

struct LimitAngleFan {
  TangentFrame frame;
  std::vector<Vec3> directions;
  std::vector<double> alpha_max;  // NaN for dropped directions
  int n() const { return int(directions.size()); }
  int valid() const;
};

struct CanonicalContour {
  TangentFrame frame;
  std::vector<std::optional<Vec3>> points;  // on T_PB(S), by direction index
  Ellipse ellipse_t;                          // in (e1, e2) plane coordinates

  PlaneH plane() const { return frame.plane(); }
  std::vector<Vec3> valid_points() const;
};

struct ForwardWarp {
  LimitAngleFan fan;
  CanonicalContour canonical;
  ContourCrossings crossings;
};

// Walk S to the contour along each direction, record the limit angle there,
// then move along the same direction on T_PB(S) until the plane's incident
// angle reaches it. Throws WarpFailed when fewer than min_directions survive.
ForwardWarp forward_warp(const SpecularObservation& obs, const SurfaceModel& surface, const LightModel& light,
                         const Vec3& camera_center, const WarpConfig& config = {});

// Point on the ray origin + s * dir (within the plane of `frame`) where the
// plane incident angle first reaches `alpha`. nullopt if not reached.
std::optional<double> march_plane_to_angle(const TangentFrame& frame, const Vec3& dir, double alpha,
                                           const LightModel& light, const Vec3& camera_center, double step,
                                           int max_steps);

// Plane incident angles of given points on T_PB(S) (the fan of a predicted
// canonical contour).
LimitAngleFan plane_limit_angles(const TangentFrame& frame, const std::vector<std::optional<Vec3>>& points,
                                 const LightModel& light, const Vec3& camera_center);

struct InverseWarp {
  std::vector<std::optional<SurfacePoint>> points;  // by direction index
  std::vector<double> arc_length;                   // walked length, NaN when dropped
  int failed() const;
  std::vector<Vec3> valid_points() const;
};

// March on S from P_B along each fan direction until the surface incident
// angle reaches the fan's limit angle. Throws WarpFailed like forward_warp.
InverseWarp inverse_warp(const LimitAngleFan& fan, const SurfacePoint& pb, const SurfaceModel& surface,
                         const LightModel& light, const Vec3& camera_center, double step,
                         const WarpConfig& config = {});

}  // namespace jolimas
