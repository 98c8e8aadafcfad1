#pragma once

// Torrance-Sparrow forward renderer and the synthetic sequence generators.
//
// Intensity model: I = ambient + k_d * max(0, N.L) + K' * exp(-(alpha / m)^2),
// alpha = acos(N . H), H the half-way vector between the light and view
// directions. Fresnel and geometric attenuation are folded into K'.

#include <cstdint>
#include <optional>
#include <vector>

#include "jolimas/image.hpp"
#include "jolimas/surfaces.hpp"

namespace jolimas {

struct Material {
  double specular_gain = 1.0;  // K'
  double roughness = 0.08;     // m, radians
  double diffuse = 0.3;        // k_d
  double ambient = 0.05;

  void validate() const;
};

struct Scene {
  SurfaceModel surface;
  Vec3 light = Vec3::Zero();
  Material material;
  std::vector<CameraView> views;
  double background = 0.0;
};

// Unit bisector of the light and view directions at p. Throws Degenerate when
// the two directions are opposite or p coincides with the light or viewer.
Vec3 halfway_vector(const Vec3& light, const Vec3& viewer, const Vec3& p);
// Non-throwing variant; nullopt when degenerate.
std::optional<Vec3> try_halfway_vector(const Vec3& light, const Vec3& viewer, const Vec3& p);

double incident_angle(const Vec3& normal, const Vec3& halfway);

// Incident angle at surface point `sp` for a point light and a camera centre.
std::optional<double> alpha_at(const SurfacePoint& sp, const Vec3& light, const Vec3& viewer);

double shade(const Material& material, double alpha, const Vec3& normal, const Vec3& light_dir);

// Incident angle at which the specular term alone equals `specular_intensity`.
double limit_angle_for_intensity(const Material& material, double specular_intensity);

Image render(const Scene& scene, const CameraView& view);

struct MirrorPoint {
  SurfacePoint point;
  double alpha = 0.0;       // residual incident angle after refinement
  double seed_alpha = 0.0;  // best incident angle on the seeding grid
};

// Visible surface point minimising the incident angle (the specular point).
// Grid seeding over the surface's parametric domain, then Newton refinement
// on the surface. nullopt when no visible seed exists.
std::optional<MirrorPoint> find_mirror_point(const SurfaceModel& surface, const Vec3& light, const Vec3& viewer,
                                             int seed_grid = 64);

// ---------------------------------------------------------------- sequences

struct MorphSequenceConfig {
  int steps = 50;
  int views_per_step = 6;
  double kappa_max = 1.0;
  SheetExtent sheet{2.0, 2.0};
  Vec3 light{0.0, -0.35, 1.0};
  Material material;
  double background = 0.0;
  int width = 640;
  int height = 480;
  double focal = 700.0;
  double arc_radius = 1.2;        // camera distance from the sheet centre
  double arc_half_angle = 0.5236;  // radians, cameras spread over [-a, a] about z
  double camera_y = 0.35;
  double jitter = 0.01;  // stddev of camera-position jitter, world units
  std::uint64_t seed = 7;
};

struct MorphStep {
  double kappa = 0.0;
  Scene scene;
};

// kappa linearly spaced in [0, kappa_max]; the same camera arc at every step.
std::vector<MorphStep> gen_plane_cylinder_sequence(const MorphSequenceConfig& config);

struct EllipsoidSequenceConfig {
  int frames = 80;
  int cluster_frames = 6;
  EllipsoidSurface object{Vec3::Zero(), Vec3(0.6, 0.4, 0.3), Mat3::Identity()};
  Vec3 light{0.0, -0.4, 1.6};
  // No diffuse term: the detection threshold then maps to one limit angle in
  // every frame.
  Material material{1.0, 0.08, 0.0, 0.05};
  double background = 0.0;
  int width = 640;
  int height = 480;
  double focal = 900.0;
  double distance = 1.8;              // camera distance from the object centre
  double start_azimuth = 1.5708;      // radians
  double start_elevation = 1.0472;
  double end_azimuth = 0.0;
  double end_elevation = 0.35;
  double cluster_radius = 0.4;  // angular radius of the reconstruction cluster
};

// One scene whose views are the ordered frames. The first `cluster_frames`
// views cluster around the starting pose; the rest orbit toward the long
// axis, where curvature is highest. Every camera aims at the specular point.
Scene gen_ellipsoid_sequence(const EllipsoidSequenceConfig& config);

}  // namespace jolimas
