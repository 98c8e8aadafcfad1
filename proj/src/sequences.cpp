#include <cmath>
#include <numbers>
#include <random>

#include "jolimas/shading.hpp"

namespace jolimas {

std::vector<MorphStep> gen_plane_cylinder_sequence(const MorphSequenceConfig& config) {
  if (config.steps < 2) throw Error(ErrorCode::InvalidArgument, "morph sequence needs at least 2 steps");
  if (config.views_per_step < 3) throw Error(ErrorCode::InvalidArgument, "morph sequence needs at least 3 views per step");
  if (config.kappa_max < 0.0) throw Error(ErrorCode::InvalidArgument, "kappa_max must be non-negative");
  config.material.validate();

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<CameraView> views;
  const Vec3& light = config.light;
  for (int j = 0; j < config.views_per_step; ++j) {
    const double phi = -config.arc_half_angle + 2.0 * config.arc_half_angle * j / (config.views_per_step - 1);
    Vec3 eye(config.arc_radius * std::sin(phi), config.camera_y, config.arc_radius * std::cos(phi));
    if (config.jitter > 0.0) eye += config.jitter * Vec3(noise(rng), noise(rng), noise(rng));
    // Aim at the mirror point of the flat sheet.
    const Vec3 mirrored(light.x(), light.y(), -light.z());
    const double t = eye.z() / (eye.z() + light.z());
    const Vec3 target = eye + t * (mirrored - eye);
    views.push_back(CameraView::look_at("v" + std::to_string(j), eye, target, Vec3::UnitY(), config.focal,
                                        config.width, config.height));
  }

  std::vector<MorphStep> out;
  out.reserve(std::size_t(config.steps));
  for (int k = 0; k < config.steps; ++k) {
    const double kappa = config.kappa_max * double(k) / double(config.steps - 1);
    Scene scene{morph_surface({kappa}, config.sheet), light, config.material, {}, config.background};
    for (const CameraView& v : views) {
      CameraView view = v;
      view.id = "k" + std::to_string(k) + "_" + v.id;
      scene.views.push_back(std::move(view));
    }
    out.push_back({kappa, std::move(scene)});
  }
  return out;
}

Scene gen_ellipsoid_sequence(const EllipsoidSequenceConfig& config) {
  if (config.frames < 7) throw Error(ErrorCode::InvalidArgument, "ellipsoid sequence needs at least 7 frames");
  if (config.cluster_frames < 3 || config.cluster_frames >= config.frames)
    throw Error(ErrorCode::InvalidArgument, "cluster frame count must lie in [3, frames)");
  config.material.validate();

  Scene scene{SurfaceModel(config.object), config.light, config.material, {}, config.background};
  const auto direction = [](double az, double el) {
    return Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el));
  };
  const int orbit_frames = config.frames - config.cluster_frames;
  for (int k = 0; k < config.frames; ++k) {
    double az = 0.0, el = 0.0;
    if (k < config.cluster_frames) {
      const double ang = 2.0 * std::numbers::pi * k / config.cluster_frames;
      el = config.start_elevation + config.cluster_radius * std::sin(ang);
      az = config.start_azimuth + config.cluster_radius * std::cos(ang) / std::cos(config.start_elevation);
    } else {
      const double u = double(k - config.cluster_frames + 1) / double(orbit_frames);
      az = config.start_azimuth + u * (config.end_azimuth - config.start_azimuth);
      el = config.start_elevation + u * (config.end_elevation - config.start_elevation);
    }
    const Vec3 eye = config.object.center + config.distance * direction(az, el);
    const auto mirror = find_mirror_point(scene.surface, config.light, eye);
    if (!mirror || mirror->alpha > 1e-6)
      throw Error(ErrorCode::NoVisibleReflection, "ellipsoid frame " + std::to_string(k) + " has no visible specular point");
    CameraView view = CameraView::look_at("f" + std::to_string(k), eye, mirror->point.position, Vec3::UnitZ(),
                                          config.focal, config.width, config.height);
    scene.views.push_back(std::move(view));
  }
  return scene;
}

}  // namespace jolimas
