#include "jolimas/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace jolimas {

namespace {

constexpr double kOnSurfaceTol = 1e-6;
constexpr double kRayEps = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

Vec3 any_perpendicular(const Vec3& a) {
  const Vec3 seed = std::abs(a.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  return (seed - seed.dot(a) * a).normalized();
}

Vec3 radial(const Cylinder& c, const Vec3& p) {
  const Vec3 d = p - c.axis_point;
  return d - d.dot(c.axis_dir) * c.axis_dir;
}

bool in_extent(const Plane& s, const Vec3& q) {
  if (!s.extent) return true;
  const PlaneExtent& e = *s.extent;
  const Vec3 v_axis = s.plane.normal.cross(e.u_axis);
  const Vec3 d = q - e.origin;
  return std::abs(d.dot(e.u_axis)) <= e.half_u && std::abs(d.dot(v_axis)) <= e.half_v;
}

bool in_extent(const Cylinder& s, const Vec3& q) {
  if (!s.extent) return true;
  const CylinderExtent& e = *s.extent;
  const Vec3 r = radial(s, q);
  const double angle = std::atan2(e.zero_dir.cross(r).dot(s.axis_dir), e.zero_dir.dot(r));
  const double axial = (q - s.axis_point).dot(s.axis_dir);
  return std::abs(angle) <= e.half_angle && std::abs(axial) <= e.half_length;
}

// Roots of a t^2 + b t + c = 0 in ascending order.
std::optional<std::pair<double, double>> quadratic_roots(double a, double b, double c) {
  if (a == 0.0) return std::nullopt;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b));
  double t0 = q / a;
  double t1 = q != 0.0 ? c / q : t0;
  if (t0 > t1) std::swap(t0, t1);
  return std::make_pair(t0, t1);
}

// ---- closest point on an axis-aligned ellipsoid (robust root finding on the
// Lagrange secular equation; inputs non-negative, e0 >= e1 >= e2).

double robust_length(double a, double b) { return std::hypot(a, b); }
double robust_length(double a, double b, double c) { return std::sqrt(a * a + b * b + c * c); }

template <typename F, typename DF>
double safeguarded_root(F f, DF df, double lo, double hi) {
  // f decreasing and convex on [lo, hi], f(lo) >= 0 >= f(hi).
  double s = lo;
  for (int it = 0; it < 200; ++it) {
    const double fs = f(s);
    if (fs == 0.0) return s;
    if (fs > 0.0) lo = s; else hi = s;
    double next = s - fs / df(s);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == s || hi - lo <= 1e-17 * std::max(1.0, std::abs(s))) return next;
    s = next;
  }
  return s;
}

Vec2 closest_on_ellipse(double e0, double e1, double y0, double y1) {
  if (y1 > 0.0) {
    if (y0 > 0.0) {
      const double z0 = y0 / e0, z1 = y1 / e1;
      const double g = z0 * z0 + z1 * z1 - 1.0;
      if (g == 0.0) return {y0, y1};
      const double r0 = (e0 / e1) * (e0 / e1);
      const double n0 = r0 * z0;
      const double lo = z1 - 1.0;
      const double hi = g < 0.0 ? 0.0 : robust_length(n0, z1) - 1.0;
      auto f = [&](double s) {
        const double a = n0 / (s + r0), b = z1 / (s + 1.0);
        return a * a + b * b - 1.0;
      };
      auto df = [&](double s) {
        const double a = n0 / (s + r0), b = z1 / (s + 1.0);
        return -2.0 * (a * a / (s + r0) + b * b / (s + 1.0));
      };
      const double s = safeguarded_root(f, df, lo, hi);
      return {r0 * y0 / (s + r0), y1 / (s + 1.0)};
    }
    return {0.0, e1};
  }
  const double numer0 = e0 * y0, denom0 = e0 * e0 - e1 * e1;
  if (numer0 < denom0) {
    const double xde0 = numer0 / denom0;
    return {e0 * xde0, e1 * std::sqrt(std::max(0.0, 1.0 - xde0 * xde0))};
  }
  return {e0, 0.0};
}

Vec3 closest_on_ellipsoid_sorted(const Vec3& e, const Vec3& y) {
  const double e0 = e(0), e1 = e(1), e2 = e(2);
  const double y0 = y(0), y1 = y(1), y2 = y(2);
  if (y2 > 0.0) {
    if (y1 > 0.0) {
      if (y0 > 0.0) {
        const double z0 = y0 / e0, z1 = y1 / e1, z2 = y2 / e2;
        const double g = z0 * z0 + z1 * z1 + z2 * z2 - 1.0;
        if (g == 0.0) return y;
        const double r0 = (e0 / e2) * (e0 / e2), r1 = (e1 / e2) * (e1 / e2);
        const double n0 = r0 * z0, n1 = r1 * z1;
        const double lo = z2 - 1.0;
        const double hi = g < 0.0 ? 0.0 : robust_length(n0, n1, z2) - 1.0;
        auto f = [&](double s) {
          const double a = n0 / (s + r0), b = n1 / (s + r1), c = z2 / (s + 1.0);
          return a * a + b * b + c * c - 1.0;
        };
        auto df = [&](double s) {
          const double a = n0 / (s + r0), b = n1 / (s + r1), c = z2 / (s + 1.0);
          return -2.0 * (a * a / (s + r0) + b * b / (s + r1) + c * c / (s + 1.0));
        };
        const double s = safeguarded_root(f, df, lo, hi);
        return {r0 * y0 / (s + r0), r1 * y1 / (s + r1), y2 / (s + 1.0)};
      }
      const Vec2 x = closest_on_ellipse(e1, e2, y1, y2);
      return {0.0, x(0), x(1)};
    }
    if (y0 > 0.0) {
      const Vec2 x = closest_on_ellipse(e0, e2, y0, y2);
      return {x(0), 0.0, x(1)};
    }
    return {0.0, 0.0, e2};
  }
  const double denom0 = e0 * e0 - e2 * e2, denom1 = e1 * e1 - e2 * e2;
  const double numer0 = e0 * y0, numer1 = e1 * y1;
  if (numer0 < denom0 && numer1 < denom1) {
    const double xde0 = numer0 / denom0, xde1 = numer1 / denom1;
    const double discr = 1.0 - xde0 * xde0 - xde1 * xde1;
    if (discr > 0.0) return {e0 * xde0, e1 * xde1, e2 * std::sqrt(discr)};
  }
  const Vec2 x = closest_on_ellipse(e0, e1, y0, y1);
  return {x(0), x(1), 0.0};
}

Vec3 closest_on_ellipsoid(const EllipsoidSurface& s, const Vec3& p, const Vec3& hint) {
  const Vec3 y = s.rotation.transpose() * (p - s.center);
  const Vec3 yh = s.rotation.transpose() * (hint - s.center);
  std::array<int, 3> order{0, 1, 2};
  std::sort(order.begin(), order.end(), [&](int i, int j) { return s.axes(i) > s.axes(j); });
  Vec3 e, ya;
  std::array<double, 3> sign{};
  for (int k = 0; k < 3; ++k) {
    const int i = order[std::size_t(k)];
    e(k) = s.axes(i);
    ya(k) = std::abs(y(i));
    sign[std::size_t(k)] = y(i) > 0.0 ? 1.0 : (y(i) < 0.0 ? -1.0 : (yh(i) < 0.0 ? -1.0 : 1.0));
  }
  const Vec3 xs = closest_on_ellipsoid_sorted(e, ya);
  Vec3 x;
  for (int k = 0; k < 3; ++k) x(order[std::size_t(k)]) = sign[std::size_t(k)] * xs(k);
  return s.center + s.rotation * x;
}

Vec3 ellipsoid_gradient(const EllipsoidSurface& s, const Vec3& p) {
  const Vec3 y = s.rotation.transpose() * (p - s.center);
  return s.rotation * y.cwiseQuotient(s.axes.cwiseAbs2());
}

double ellipsoid_residual(const EllipsoidSurface& s, const Vec3& p) {
  const Vec3 y = s.rotation.transpose() * (p - s.center);
  const double f = y.cwiseQuotient(s.axes).squaredNorm() - 1.0;
  const double g = 2.0 * ellipsoid_gradient(s, p).norm();
  return g > 0.0 ? f / g : f;
}

void off_surface(const char* what, double residual) {
  throw Error(ErrorCode::OffSurface, std::string(what) + ": point is " + std::to_string(residual) + " away from the surface");
}

}  // namespace

SurfaceModel::SurfaceModel(Plane s) : v_(std::move(s)) {
  auto& p = std::get<Plane>(v_);
  p.plane.normal.normalize();
  if (p.extent) {
    p.extent->u_axis = (p.extent->u_axis - p.extent->u_axis.dot(p.plane.normal) * p.plane.normal).normalized();
  }
}

SurfaceModel::SurfaceModel(Cylinder s) : v_(std::move(s)) {
  auto& c = std::get<Cylinder>(v_);
  if (!(c.radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "cylinder radius must be positive");
  c.axis_dir.normalize();
  if (c.extent) {
    Vec3& z = c.extent->zero_dir;
    z = (z - z.dot(c.axis_dir) * c.axis_dir).normalized();
  }
}

SurfaceModel::SurfaceModel(Sphere s) : v_(std::move(s)) {
  if (!(std::get<Sphere>(v_).radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
}

SurfaceModel::SurfaceModel(EllipsoidSurface s) : v_(std::move(s)) {
  if (!(std::get<EllipsoidSurface>(v_).axes.minCoeff() > 0.0))
    throw Error(ErrorCode::InvalidArgument, "ellipsoid semi-axes must be positive");
}

SurfaceModel::SurfaceModel(std::shared_ptr<const TriangleMesh> s) : v_(std::move(s)) {}
SurfaceModel::SurfaceModel(std::shared_ptr<const GridSurface> s) : v_(std::move(s)) {}

SurfaceKind SurfaceModel::kind() const {
  return std::visit(overloaded{
                        [](const Plane&) { return SurfaceKind::Plane; },
                        [](const Cylinder&) { return SurfaceKind::Cylinder; },
                        [](const Sphere&) { return SurfaceKind::Sphere; },
                        [](const EllipsoidSurface&) { return SurfaceKind::Ellipsoid; },
                        [](const std::shared_ptr<const TriangleMesh>&) { return SurfaceKind::Mesh; },
                        [](const std::shared_ptr<const GridSurface>&) { return SurfaceKind::Grid; },
                    },
                    v_);
}

Vec3 SurfaceModel::normal_at(const Vec3& p) const {
  return std::visit(
      overloaded{
          [&](const Plane& s) -> Vec3 {
            const double r = s.plane.signed_distance(p);
            if (std::abs(r) > kOnSurfaceTol) off_surface("plane", r);
            return s.plane.normal;
          },
          [&](const Cylinder& s) -> Vec3 {
            const Vec3 r = radial(s, p);
            const double res = r.norm() - s.radius;
            if (std::abs(res) > kOnSurfaceTol) off_surface("cylinder", res);
            return r.normalized();
          },
          [&](const Sphere& s) -> Vec3 {
            const Vec3 r = p - s.center;
            const double res = r.norm() - s.radius;
            if (std::abs(res) > kOnSurfaceTol) off_surface("sphere", res);
            return r.normalized();
          },
          [&](const EllipsoidSurface& s) -> Vec3 {
            const double res = ellipsoid_residual(s, p);
            if (std::abs(res) > kOnSurfaceTol) off_surface("ellipsoid", res);
            return ellipsoid_gradient(s, p).normalized();
          },
          [&](const std::shared_ptr<const TriangleMesh>& m) -> Vec3 {
            const auto hit = m->closest(p);
            if (hit.t > kOnSurfaceTol) off_surface("mesh", hit.t);
            return m->interpolated_normal(hit);
          },
          [&](const std::shared_ptr<const GridSurface>& g) -> Vec3 {
            const CameraView& cam = g->camera();
            const double z = cam.depth(p);
            const Vec2 px = cam.project(p);
            if (!(z > 0.0) || !g->in_grid(px)) off_surface("grid", std::numeric_limits<double>::infinity());
            const double res = z - g->depth(px);
            if (std::abs(res) > kOnSurfaceTol * std::max(1.0, z)) off_surface("grid", res);
            return g->normal(px);
          },
      },
      v_);
}

std::optional<SurfacePoint> SurfaceModel::intersect_ray(const Vec3& origin, const Vec3& dir) const {
  return std::visit(
      overloaded{
          [&](const Plane& s) -> std::optional<SurfacePoint> {
            const double denom = s.plane.normal.dot(dir);
            if (std::abs(denom) < 1e-15) return std::nullopt;
            const double t = -s.plane.signed_distance(origin) / denom;
            if (t <= kRayEps) return std::nullopt;
            const Vec3 q = origin + t * dir;
            if (!in_extent(s, q)) return std::nullopt;
            return SurfacePoint{s.plane.project(q), s.plane.normal};
          },
          [&](const Cylinder& s) -> std::optional<SurfacePoint> {
            const Vec3 dp = dir - dir.dot(s.axis_dir) * s.axis_dir;
            const Vec3 op = radial(s, origin);
            const auto roots = quadratic_roots(dp.squaredNorm(), 2.0 * op.dot(dp), op.squaredNorm() - s.radius * s.radius);
            if (!roots) return std::nullopt;
            for (double t : {roots->first, roots->second}) {
              if (t <= kRayEps) continue;
              const Vec3 q = origin + t * dir;
              if (!in_extent(s, q)) continue;
              const Vec3 r = radial(s, q).normalized();
              return SurfacePoint{q - radial(s, q) + s.radius * r, r};
            }
            return std::nullopt;
          },
          [&](const Sphere& s) -> std::optional<SurfacePoint> {
            const Vec3 oc = origin - s.center;
            const auto roots = quadratic_roots(dir.squaredNorm(), 2.0 * oc.dot(dir), oc.squaredNorm() - s.radius * s.radius);
            if (!roots) return std::nullopt;
            for (double t : {roots->first, roots->second}) {
              if (t <= kRayEps) continue;
              const Vec3 n = (origin + t * dir - s.center).normalized();
              return SurfacePoint{s.center + s.radius * n, n};
            }
            return std::nullopt;
          },
          [&](const EllipsoidSurface& s) -> std::optional<SurfacePoint> {
            const Vec3 o = (s.rotation.transpose() * (origin - s.center)).cwiseQuotient(s.axes);
            const Vec3 d = (s.rotation.transpose() * dir).cwiseQuotient(s.axes);
            const auto roots = quadratic_roots(d.squaredNorm(), 2.0 * o.dot(d), o.squaredNorm() - 1.0);
            if (!roots) return std::nullopt;
            for (double t : {roots->first, roots->second}) {
              if (t <= kRayEps) continue;
              const Vec3 unit = (o + t * d).normalized();
              const Vec3 q = s.center + s.rotation * unit.cwiseProduct(s.axes);
              return SurfacePoint{q, ellipsoid_gradient(s, q).normalized()};
            }
            return std::nullopt;
          },
          [&](const std::shared_ptr<const TriangleMesh>& m) -> std::optional<SurfacePoint> {
            const auto hit = m->intersect(origin, dir);
            if (!hit) return std::nullopt;
            return SurfacePoint{hit->point, m->interpolated_normal(*hit)};
          },
          [&](const std::shared_ptr<const GridSurface>& g) -> std::optional<SurfacePoint> {
            return g->intersect(origin, dir);
          },
      },
      v_);
}

SurfacePoint SurfaceModel::closest_point(const Vec3& p, const Vec3& hint) const {
  return std::visit(
      overloaded{
          [&](const Plane& s) { return SurfacePoint{s.plane.project(p), s.plane.normal}; },
          [&](const Cylinder& s) {
            Vec3 r = radial(s, p);
            if (r.norm() < 1e-12 * s.radius) r = radial(s, hint);
            if (r.norm() < 1e-12 * s.radius) r = any_perpendicular(s.axis_dir);
            const Vec3 n = r.normalized();
            return SurfacePoint{p - radial(s, p) + s.radius * n, n};
          },
          [&](const Sphere& s) {
            Vec3 r = p - s.center;
            if (r.norm() < 1e-12 * s.radius) r = hint - s.center;
            if (r.norm() < 1e-12 * s.radius) r = Vec3::UnitZ();
            const Vec3 n = r.normalized();
            return SurfacePoint{s.center + s.radius * n, n};
          },
          [&](const EllipsoidSurface& s) {
            const Vec3 q = closest_on_ellipsoid(s, p, hint);
            return SurfacePoint{q, ellipsoid_gradient(s, q).normalized()};
          },
          [&](const std::shared_ptr<const TriangleMesh>& m) {
            const auto hit = m->closest(p);
            return SurfacePoint{hit.point, m->interpolated_normal(hit)};
          },
          [&](const std::shared_ptr<const GridSurface>& g) { return g->closest(p, hint); },
      },
      v_);
}

double SurfaceModel::residual(const Vec3& p) const {
  return std::visit(overloaded{
                        [&](const Plane& s) { return s.plane.signed_distance(p); },
                        [&](const Cylinder& s) { return radial(s, p).norm() - s.radius; },
                        [&](const Sphere& s) { return (p - s.center).norm() - s.radius; },
                        [&](const EllipsoidSurface& s) { return ellipsoid_residual(s, p); },
                        [&](const std::shared_ptr<const TriangleMesh>& m) { return m->closest(p).t; },
                        [&](const std::shared_ptr<const GridSurface>& g) {
                          return (g->closest(p, p).position - p).norm();
                        },
                    },
                    v_);
}

std::vector<Vec3> SurfaceModel::seed_points(int n) const {
  std::vector<Vec3> out;
  if (n < 2) n = 2;
  const auto lin = [n](double lo, double hi, int k) { return lo + (hi - lo) * (k + 0.5) / n; };
  std::visit(
      overloaded{
          [&](const Plane& s) {
            if (!s.extent) return;
            const PlaneExtent& e = *s.extent;
            const Vec3 v_axis = s.plane.normal.cross(e.u_axis);
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j)
                out.push_back(s.plane.project(e.origin + lin(-e.half_u, e.half_u, i) * e.u_axis +
                                              lin(-e.half_v, e.half_v, j) * v_axis));
          },
          [&](const Cylinder& s) {
            const Vec3 zero = s.extent ? s.extent->zero_dir : any_perpendicular(s.axis_dir);
            const double ha = s.extent ? s.extent->half_angle : std::numbers::pi;
            const double hl = s.extent ? s.extent->half_length : 4.0 * s.radius;
            const Vec3 side = s.axis_dir.cross(zero);
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) {
                const double th = lin(-ha, ha, i);
                out.push_back(s.axis_point + lin(-hl, hl, j) * s.axis_dir +
                              s.radius * (std::cos(th) * zero + std::sin(th) * side));
              }
          },
          [&](const Sphere& s) {
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) {
                const double th = lin(0.0, std::numbers::pi, i), ph = lin(0.0, 2.0 * std::numbers::pi, j);
                out.push_back(s.center + s.radius * Vec3(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)));
              }
          },
          [&](const EllipsoidSurface& s) {
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j) {
                const double th = lin(0.0, std::numbers::pi, i), ph = lin(0.0, 2.0 * std::numbers::pi, j);
                const Vec3 u(std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th));
                out.push_back(s.center + s.rotation * u.cwiseProduct(s.axes));
              }
          },
          [&](const std::shared_ptr<const TriangleMesh>& m) {
            const std::size_t total = m->vertices().size();
            const std::size_t stride = std::max<std::size_t>(1, total / std::size_t(n * n));
            for (std::size_t k = 0; k < total; k += stride) out.push_back(m->vertices()[k]);
          },
          [&](const std::shared_ptr<const GridSurface>& g) {
            for (int i = 0; i < n; ++i)
              for (int j = 0; j < n; ++j)
                out.push_back(g->position({lin(0.0, g->width() - 1.0, i), lin(0.0, g->height() - 1.0, j)}));
          },
      },
      v_);
  return out;
}

SurfaceModel SurfaceModel::transformed(const Mat3& rot, const Vec3& t) const {
  const auto xf = [&](const Vec3& p) -> Vec3 { return rot * p + t; };
  return std::visit(
      overloaded{
          [&](const Plane& s) -> SurfaceModel {
            Plane out = s;
            const Vec3 n = rot * s.plane.normal;
            out.plane = PlaneH::from_point_normal(xf(-s.plane.offset * s.plane.normal), n);
            if (s.extent) {
              out.extent->origin = xf(s.extent->origin);
              out.extent->u_axis = rot * s.extent->u_axis;
            }
            return out;
          },
          [&](const Cylinder& s) -> SurfaceModel {
            Cylinder out = s;
            out.axis_point = xf(s.axis_point);
            out.axis_dir = rot * s.axis_dir;
            if (s.extent) out.extent->zero_dir = rot * s.extent->zero_dir;
            return out;
          },
          [&](const Sphere& s) -> SurfaceModel { return Sphere{xf(s.center), s.radius}; },
          [&](const EllipsoidSurface& s) -> SurfaceModel { return EllipsoidSurface{xf(s.center), s.axes, rot * s.rotation}; },
          [&](const std::shared_ptr<const TriangleMesh>& m) -> SurfaceModel {
            std::vector<Vec3> verts, normals;
            for (const Vec3& v : m->vertices()) verts.push_back(xf(v));
            for (const Vec3& n : m->normals()) normals.push_back(rot * n);
            return std::make_shared<const TriangleMesh>(std::move(verts), m->faces(), std::move(normals));
          },
          [&](const std::shared_ptr<const GridSurface>& g) -> SurfaceModel {
            CameraView cam = g->camera();
            cam.rotation = g->camera().rotation * rot.transpose();
            cam.translation = g->camera().translation - cam.rotation * t;
            std::vector<double> depth(std::size_t(g->width()) * g->height());
            std::vector<Vec3> normals(depth.size());
            for (int v = 0; v < g->height(); ++v)
              for (int u = 0; u < g->width(); ++u) {
                depth[std::size_t(v) * g->width() + u] = g->depth_at(u, v);
                normals[std::size_t(v) * g->width() + u] = rot * g->normal_at_pixel(u, v);
              }
            return std::make_shared<const GridSurface>(cam, std::move(depth), std::move(normals));
          },
      },
      v_);
}

std::optional<WalkResult> try_walk(const SurfaceModel& s, const SurfacePoint& start, const Vec3& tangent_dir,
                                   double step) {
  const SurfacePoint q = s.closest_point(start.position + step * tangent_dir, start.position);
  if ((q.position - start.position).norm() < 0.1 * step) return std::nullopt;
  Vec3 dir = tangent_dir - tangent_dir.dot(q.normal) * q.normal;
  const double len = dir.norm();
  if (len < 1e-12) return std::nullopt;
  return WalkResult{q, dir / len};
}

WalkResult walk_on_surface(const SurfaceModel& s, const SurfacePoint& start, const Vec3& tangent_dir, double step) {
  if (!(step > 0.0)) throw Error(ErrorCode::InvalidArgument, "walk step must be positive");
  if (std::abs(tangent_dir.dot(start.normal)) > 1e-6)
    throw Error(ErrorCode::InvalidArgument, "walk direction is not tangent to the surface");
  auto r = try_walk(s, start, tangent_dir, step);
  if (!r) throw Error(ErrorCode::StalledWalk, "projected step advanced less than 10% of the step");
  return *r;
}

PlaneH tangent_plane(const SurfacePoint& sp) { return PlaneH::from_point_normal(sp.position, sp.normal); }

SurfaceModel morph_surface(MorphParam kappa, const SheetExtent& extent) {
  if (kappa.kappa < 0.0) throw Error(ErrorCode::InvalidArgument, "morph curvature must be non-negative");
  if (kappa.kappa == 0.0) {
    Plane p;
    p.plane = PlaneH{Vec3::UnitZ(), 0.0};
    p.extent = PlaneExtent{Vec3::Zero(), Vec3::UnitX(), 0.5 * extent.width, 0.5 * extent.length};
    return p;
  }
  const double r = 1.0 / kappa.kappa;
  Cylinder c;
  c.axis_point = Vec3(0.0, 0.0, -r);
  c.axis_dir = Vec3::UnitY();
  c.radius = r;
  c.extent = CylinderExtent{Vec3::UnitZ(), 0.5 * extent.width * kappa.kappa, 0.5 * extent.length};
  return c;
}

}  // namespace jolimas
