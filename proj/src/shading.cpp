#include "jolimas/shading.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace jolimas {

void Material::validate() const {
  if (!(specular_gain > 0.0)) throw Error(ErrorCode::InvalidArgument, "material: K' must be positive");
  if (!(roughness > 0.0)) throw Error(ErrorCode::InvalidArgument, "material: roughness must be positive");
  if (diffuse < 0.0 || diffuse > 1.0) throw Error(ErrorCode::InvalidArgument, "material: k_d must lie in [0, 1]");
}

std::optional<Vec3> try_halfway_vector(const Vec3& light, const Vec3& viewer, const Vec3& p) {
  const Vec3 l = light - p, v = viewer - p;
  const double ln = l.norm(), vn = v.norm();
  if (ln == 0.0 || vn == 0.0) return std::nullopt;
  const Vec3 h = l / ln + v / vn;
  const double hn = h.norm();
  if (hn < 1e-12) return std::nullopt;
  return h / hn;
}

Vec3 halfway_vector(const Vec3& light, const Vec3& viewer, const Vec3& p) {
  auto h = try_halfway_vector(light, viewer, p);
  if (!h) throw Error(ErrorCode::Degenerate, "light and view directions are opposite or coincide with the point");
  return *h;
}

double incident_angle(const Vec3& normal, const Vec3& halfway) {
  return std::acos(std::clamp(normal.dot(halfway), -1.0, 1.0));
}

std::optional<double> alpha_at(const SurfacePoint& sp, const Vec3& light, const Vec3& viewer) {
  auto h = try_halfway_vector(light, viewer, sp.position);
  if (!h) return std::nullopt;
  return incident_angle(sp.normal, *h);
}

double shade(const Material& material, double alpha, const Vec3& normal, const Vec3& light_dir) {
  const double ratio = alpha / material.roughness;
  return material.ambient + material.diffuse * std::max(0.0, normal.dot(light_dir)) +
         material.specular_gain * std::exp(-ratio * ratio);
}

double limit_angle_for_intensity(const Material& material, double specular_intensity) {
  return material.roughness * std::sqrt(-std::log(specular_intensity / material.specular_gain));
}

Image render(const Scene& scene, const CameraView& view) {
  Image img(view.width, view.height, float(scene.background));
  const Vec3 c = view.center();
  for (int v = 0; v < view.height; ++v) {
    for (int u = 0; u < view.width; ++u) {
      const Vec3 dir = view.ray_direction(Vec2(u, v));
      const auto hit = scene.surface.intersect_ray(c, dir);
      if (!hit) continue;
      const Vec3 l = (scene.light - hit->position).normalized();
      const auto h = try_halfway_vector(scene.light, c, hit->position);
      const double alpha = h ? incident_angle(hit->normal, *h) : std::numbers::pi;
      img.at(u, v) = float(shade(scene.material, alpha, hit->normal, l));
    }
  }
  return img;
}

// ---------------------------------------------------------------- mirror point

namespace {

std::optional<MirrorPoint> plane_mirror_point(const Plane& s, const Vec3& light, const Vec3& viewer) {
  const double dl = s.plane.signed_distance(light), dv = s.plane.signed_distance(viewer);
  if (!(dl > 0.0 && dv > 0.0)) return std::nullopt;
  const Vec3 mirrored = light - 2.0 * dl * s.plane.normal;
  const double t = dv / (dv + dl);
  const Vec3 p = s.plane.project(viewer + t * (mirrored - viewer));
  return MirrorPoint{{p, s.plane.normal}, 0.0, 0.0};
}

// Tangential residual of (H - N) expressed in a fixed frame.
std::optional<Vec2> mirror_residual(const SurfacePoint& sp, const Vec3& light, const Vec3& viewer, const Vec3& e1,
                                    const Vec3& e2) {
  auto h = try_halfway_vector(light, viewer, sp.position);
  if (!h) return std::nullopt;
  const Vec3 d = *h - sp.normal;
  return Vec2(d.dot(e1), d.dot(e2));
}

}  // namespace

std::optional<MirrorPoint> find_mirror_point(const SurfaceModel& surface, const Vec3& light, const Vec3& viewer,
                                             int seed_grid) {
  if (const auto* plane = std::get_if<Plane>(&surface.variant())) {
    // Off a bounded sheet the seeded search below reports the best visible point.
    auto mp = plane_mirror_point(*plane, light, viewer);
    if (!mp || !plane->extent) return mp;
    const Vec3 ray = mp->point.position - viewer;
    if (surface.intersect_ray(viewer, ray.normalized())) return mp;
  }

  std::optional<SurfacePoint> best;
  double best_alpha = std::numeric_limits<double>::infinity();
  for (const Vec3& q : surface.seed_points(seed_grid)) {
    const SurfacePoint sp = surface.closest_point(q, q);
    if (sp.normal.dot(viewer - sp.position) <= 0.0 || sp.normal.dot(light - sp.position) <= 0.0) continue;
    const auto alpha = alpha_at(sp, light, viewer);
    if (!alpha || *alpha >= best_alpha) continue;
    const Vec3 ray = sp.position - viewer;
    const double dist = ray.norm();
    const auto hit = surface.intersect_ray(viewer, ray / dist);
    if (!hit || (hit->position - sp.position).norm() > 1e-6 * std::max(1.0, dist)) continue;
    best = sp;
    best_alpha = *alpha;
  }
  if (!best) return std::nullopt;

  MirrorPoint out{*best, best_alpha, best_alpha};
  SurfacePoint cur = *best;
  double cur_alpha = best_alpha;
  for (int it = 0; it < 100 && cur_alpha > 1e-12; ++it) {
    const auto [e1, e2] = tangent_plane(cur).basis();
    const auto f0 = mirror_residual(cur, light, viewer, e1, e2);
    if (!f0) break;
    const double delta = 1e-6 * std::max(1e-3, (viewer - cur.position).norm());
    Eigen::Matrix2d jac;
    bool ok = true;
    for (int k = 0; k < 2; ++k) {
      const Vec3 e = k == 0 ? e1 : e2;
      const SurfacePoint moved = surface.closest_point(cur.position + delta * e, cur.position);
      const double moved_len = (moved.position - cur.position).dot(e);
      const auto fk = mirror_residual(moved, light, viewer, e1, e2);
      if (!fk || std::abs(moved_len) < 1e-3 * delta) {
        ok = false;
        break;
      }
      jac.col(k) = (*fk - *f0) / moved_len;
    }
    if (!ok || std::abs(jac.determinant()) < 1e-300) break;
    Vec2 step = -jac.partialPivLu().solve(*f0);
    bool improved = false;
    for (int halving = 0; halving < 30; ++halving) {
      const SurfacePoint cand = surface.closest_point(cur.position + step(0) * e1 + step(1) * e2, cur.position);
      const auto a = alpha_at(cand, light, viewer);
      if (a && *a < cur_alpha) {
        cur = cand;
        cur_alpha = *a;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  out.point = cur;
  out.alpha = cur_alpha;
  return out;
}

}  // namespace jolimas
