#include "jolimas/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace jolimas {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kBisections = 60;

bool point_in_polygon(const std::vector<Vec2>& poly, const Vec2& p) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (p.x() < x) inside = !inside;
    }
  }
  return inside;
}

// Smallest parameter t in [0, 1] where segment a->b meets the polygon boundary.
std::optional<double> first_crossing(const std::vector<Vec2>& poly, const Vec2& a, const Vec2& b) {
  const Vec2 r = b - a;
  std::optional<double> best;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& c = poly[j];
    const Vec2 s = poly[i] - c;
    const double denom = r.x() * s.y() - r.y() * s.x();
    if (std::abs(denom) < 1e-300) continue;
    const Vec2 ac = c - a;
    const double t = (ac.x() * s.y() - ac.y() * s.x()) / denom;
    const double u = (ac.x() * r.y() - ac.y() * r.x()) / denom;
    if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) continue;
    if (!best || t < *best) best = t;
  }
  return best;
}

double major_diameter(const std::vector<Vec3>& pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, (pts[i] - pts[j]).squaredNorm());
  return std::sqrt(best);
}

SurfacePoint chord_point(const SurfaceModel& surface, const SurfacePoint& a, const SurfacePoint& b, double t) {
  const Vec3 p = a.position + t * (b.position - a.position);
  return surface.closest_point(p, p);
}

Ellipse fit_plane_ellipse(const TangentFrame& frame, const std::vector<std::optional<Vec3>>& points) {
  std::vector<Vec2> q;
  for (const auto& p : points)
    if (p) q.push_back(frame.to_plane(*p));
  return fit_ellipse(q);
}

}  // namespace

LightModel LightModel::mirror(const SurfacePoint& pb, const Vec3& camera_center) {
  const Vec3 v = (camera_center - pb.position).normalized();
  const Vec3& n = pb.normal;
  return direction(2.0 * n.dot(v) * n - v);
}

std::optional<Vec3> LightModel::halfway(const Vec3& viewer, const Vec3& p) const {
  if (!directional) return try_halfway_vector(value, viewer, p);
  const Vec3 v = viewer - p;
  const double vn = v.norm();
  if (vn == 0.0) return std::nullopt;
  const Vec3 h = value + v / vn;
  const double hn = h.norm();
  if (hn < 1e-12) return std::nullopt;
  return h / hn;
}

double limit_angle_at(const SurfacePoint& p, const Vec3& light, const Vec3& camera_center) {
  return incident_angle(p.normal, halfway_vector(light, camera_center, p.position));
}

std::optional<double> warp_alpha(const Vec3& normal, const Vec3& p, const LightModel& light,
                                 const Vec3& camera_center) {
  const auto h = light.halfway(camera_center, p);
  if (!h) return std::nullopt;
  return incident_angle(normal, *h);
}

TangentFrame TangentFrame::at(const SurfacePoint& pb, const Vec3& camera_center) {
  TangentFrame f;
  f.origin = pb.position;
  f.normal = pb.normal.normalized();
  Vec3 toward = camera_center - pb.position;
  toward -= toward.dot(f.normal) * f.normal;
  if (toward.norm() > 1e-9 * std::max(1.0, (camera_center - pb.position).norm())) {
    f.e1 = toward.normalized();
  } else {
    f.e1 = tangent_plane(pb).basis().first;
  }
  f.e2 = f.normal.cross(f.e1);
  return f;
}

double fan_angle(int i, int n) { return 2.0 * std::numbers::pi * double(i) / double(n); }

int ContourCrossings::failed() const {
  return int(std::count_if(points.begin(), points.end(), [](const auto& p) { return !p.has_value(); }));
}

int LimitAngleFan::valid() const {
  return int(std::count_if(alpha_max.begin(), alpha_max.end(), [](double a) { return std::isfinite(a); }));
}

std::vector<Vec3> CanonicalContour::valid_points() const {
  std::vector<Vec3> out;
  for (const auto& p : points)
    if (p) out.push_back(*p);
  return out;
}

int InverseWarp::failed() const {
  return int(std::count_if(points.begin(), points.end(), [](const auto& p) { return !p.has_value(); }));
}

std::vector<Vec3> InverseWarp::valid_points() const {
  std::vector<Vec3> out;
  for (const auto& p : points)
    if (p) out.push_back(p->position);
  return out;
}

ContourCrossings sample_contour_crossings(const SpecularObservation& obs, const SurfaceModel& surface,
                                          const Vec3& camera_center, const WarpConfig& config) {
  if (config.directions < 3) throw Error(ErrorCode::InvalidArgument, "warp needs at least 3 directions");
  if (obs.contour_s.size() < 3) throw Error(ErrorCode::InvalidArgument, "surface contour has fewer than 3 points");
  ContourCrossings out;
  out.frame = TangentFrame::at(obs.pb, camera_center);
  const double diameter = major_diameter(obs.contour_s);
  out.step = config.step_fraction * diameter;
  out.points.assign(std::size_t(config.directions), std::nullopt);
  if (!(out.step > 0.0)) return out;

  std::vector<Vec2> poly;
  poly.reserve(obs.contour_s.size());
  for (const Vec3& p : obs.contour_s) poly.push_back(out.frame.to_plane(p));
  if (!point_in_polygon(poly, Vec2::Zero())) return out;

  for (int i = 0; i < config.directions; ++i) {
    SurfacePoint cur = obs.pb;
    Vec3 dir = out.frame.direction(fan_angle(i, config.directions));
    Vec2 cur2 = Vec2::Zero();
    for (int k = 0; k < config.max_steps; ++k) {
      const auto next = try_walk(surface, cur, dir, out.step);
      if (!next) break;
      const Vec2 next2 = out.frame.to_plane(next->point.position);
      if (const auto t = first_crossing(poly, cur2, next2)) {
        out.points[std::size_t(i)] = chord_point(surface, cur, next->point, *t);
        break;
      }
      cur = next->point;
      dir = next->direction;
      cur2 = next2;
    }
  }
  return out;
}

std::optional<double> march_plane_to_angle(const TangentFrame& frame, const Vec3& dir, double alpha,
                                           const LightModel& light, const Vec3& camera_center, double step,
                                           int max_steps) {
  const auto alpha_at_s = [&](double s) { return warp_alpha(frame.normal, frame.origin + s * dir, light, camera_center); };
  double lo = 0.0;
  for (int k = 1; k <= max_steps; ++k) {
    const double hi = k * step;
    const auto a = alpha_at_s(hi);
    if (!a) return std::nullopt;
    if (*a >= alpha) {
      double l = lo, h = hi;
      for (int it = 0; it < kBisections; ++it) {
        const double mid = 0.5 * (l + h);
        const auto am = alpha_at_s(mid);
        if (!am) return std::nullopt;
        (*am >= alpha ? h : l) = mid;
      }
      return 0.5 * (l + h);
    }
    lo = hi;
  }
  return std::nullopt;
}

ForwardWarp forward_warp(const SpecularObservation& obs, const SurfaceModel& surface, const LightModel& light,
                         const Vec3& camera_center, const WarpConfig& config) {
  ForwardWarp out;
  out.crossings = sample_contour_crossings(obs, surface, camera_center, config);
  const TangentFrame& frame = out.crossings.frame;
  out.fan.frame = frame;
  out.canonical.frame = frame;
  const std::size_t n = std::size_t(config.directions);
  out.fan.directions.resize(n);
  out.fan.alpha_max.assign(n, kNaN);
  out.canonical.points.assign(n, std::nullopt);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 dir = frame.direction(fan_angle(int(i), config.directions));
    out.fan.directions[i] = dir;
    const auto& cross = out.crossings.points[i];
    if (!cross) continue;
    const auto alpha = warp_alpha(cross->normal, cross->position, light, camera_center);
    if (!alpha) continue;
    const auto s = march_plane_to_angle(frame, dir, *alpha, light, camera_center, out.crossings.step, config.max_steps);
    if (!s) continue;
    out.fan.alpha_max[i] = *alpha;
    out.canonical.points[i] = frame.origin + *s * dir;
  }
  if (out.fan.valid() < config.min_directions)
    throw Error(ErrorCode::WarpFailed, "view '" + obs.view_id + "': only " + std::to_string(out.fan.valid()) +
                                           " of " + std::to_string(n) + " warp directions survived");
  out.canonical.ellipse_t = fit_plane_ellipse(frame, out.canonical.points);
  return out;
}

LimitAngleFan plane_limit_angles(const TangentFrame& frame, const std::vector<std::optional<Vec3>>& points,
                                 const LightModel& light, const Vec3& camera_center) {
  LimitAngleFan fan;
  fan.frame = frame;
  const int n = int(points.size());
  for (int i = 0; i < n; ++i) {
    fan.directions.push_back(frame.direction(fan_angle(i, n)));
    double a = kNaN;
    if (const auto& p = points[std::size_t(i)]) {
      if (const auto w = warp_alpha(frame.normal, *p, light, camera_center)) a = *w;
    }
    fan.alpha_max.push_back(a);
  }
  return fan;
}

InverseWarp inverse_warp(const LimitAngleFan& fan, const SurfacePoint& pb, const SurfaceModel& surface,
                         const LightModel& light, const Vec3& camera_center, double step, const WarpConfig& config) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "inverse warp step must be positive");
  InverseWarp out;
  const std::size_t n = fan.directions.size();
  out.points.assign(n, std::nullopt);
  out.arc_length.assign(n, kNaN);
  const auto alpha_of = [&](const SurfacePoint& sp) { return warp_alpha(sp.normal, sp.position, light, camera_center); };

  for (std::size_t i = 0; i < n; ++i) {
    const double target = fan.alpha_max[i];
    if (!std::isfinite(target)) continue;
    SurfacePoint cur = pb;
    Vec3 dir = fan.directions[i] - fan.directions[i].dot(pb.normal) * pb.normal;
    if (dir.norm() < 1e-12) continue;
    dir.normalize();
    double walked = 0.0;
    for (int k = 0; k < config.max_steps; ++k) {
      const auto next = try_walk(surface, cur, dir, step);
      if (!next) break;
      const auto a = alpha_of(next->point);
      if (!a) break;
      const double seg = (next->point.position - cur.position).norm();
      if (*a >= target) {
        double lo = 0.0, hi = 1.0;
        for (int it = 0; it < kBisections; ++it) {
          const double mid = 0.5 * (lo + hi);
          const auto am = alpha_of(chord_point(surface, cur, next->point, mid));
          if (!am) break;
          (*am >= target ? hi : lo) = mid;
        }
        const double t = 0.5 * (lo + hi);
        out.points[i] = chord_point(surface, cur, next->point, t);
        out.arc_length[i] = walked + t * seg;
        break;
      }
      walked += seg;
      cur = next->point;
      dir = next->direction;
    }
  }
  const int valid = int(n) - out.failed();
  if (valid < config.min_directions)
    throw Error(ErrorCode::WarpFailed, "inverse warp: only " + std::to_string(valid) + " of " + std::to_string(n) +
                                           " directions reached their limit angle");
  return out;
}

}  // namespace jolimas
