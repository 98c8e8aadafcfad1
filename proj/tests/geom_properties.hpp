#pragma once

// Randomised geometry-kernel properties. Each check returns the worst error
// seen so unit tests and the acceptance gate can apply the same tolerance.

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "support.hpp"

namespace jt {

struct PropertyCheck {
  std::string name;
  double worst = 0.0;
  double tolerance = 0.0;
  bool ok() const { return worst <= tolerance; }
};

inline double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline PropertyCheck check_reflection_involution(int trials = 1000, std::uint64_t seed = 11) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  PropertyCheck c{"reflection involution H*H = I", 0.0, 1e-12};
  for (int i = 0; i < trials; ++i) {
    const PlaneH p{random_unit(rng), u(rng)};
    const Mat4 h = reflect_across_plane(p);
    c.worst = std::max(c.worst, (h * h - Mat4::Identity()).cwiseAbs().maxCoeff());
  }
  return c;
}

inline PropertyCheck check_adjoint_identity(int trials = 1000, std::uint64_t seed = 12) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  PropertyCheck c{"adj(adj(M)) = det(M) M (3x3), det(M)^2 M (4x4)", 0.0, 1e-9};
  for (int i = 0; i < trials; ++i) {
    Mat3 m3;
    Mat4 m4;
    for (int r = 0; r < 3; ++r)
      for (int k = r; k < 3; ++k) m3(r, k) = m3(k, r) = u(rng);
    for (int r = 0; r < 4; ++r)
      for (int k = r; k < 4; ++k) m4(r, k) = m4(k, r) = u(rng);
    const double d3 = m3.determinant(), d4 = m4.determinant();
    const Mat3 e3 = d3 * m3;
    const Mat4 e4 = d4 * d4 * m4;
    c.worst = std::max(c.worst, (adjugate(adjugate(m3)) - e3).norm() / std::max(1.0, e3.norm()));
    c.worst = std::max(c.worst, (adjugate(adjugate(m4)) - e4).norm() / std::max(1.0, e4.norm()));
  }
  return c;
}

inline Ellipse random_ellipse(std::mt19937_64& rng, double max_ratio = 50.0) {
  std::uniform_real_distribution<double> c(-300.0, 300.0), a(1.0, 200.0), r(1.0, max_ratio), t(0.0, kPi);
  Ellipse e;
  e.center = Vec2(c(rng), c(rng));
  e.a = a(rng);
  e.b = e.a / r(rng);
  e.theta = t(rng);
  return e;
}

// Parameter distance modulo pi in theta, relative to the major axis.
inline double ellipse_distance(const Ellipse& x, const Ellipse& y) {
  const Ellipse p = x.normalized(), q = y.normalized();
  double dt = std::abs(p.theta - q.theta);
  dt = std::min(dt, kPi - dt);
  // Orientation is meaningless for near-circles.
  if (std::abs(q.a - q.b) < 1e-6 * q.a) dt = 0.0;
  const double scale = std::max(1.0, q.a);
  return std::max({(p.center - q.center).norm() / scale, std::abs(p.a - q.a) / scale, std::abs(p.b - q.b) / scale,
                   dt});
}

inline PropertyCheck check_conic_round_trip(int trials = 1000, std::uint64_t seed = 13) {
  std::mt19937_64 rng(seed);
  PropertyCheck c{"ellipse -> conic -> ellipse", 0.0, 1e-9};
  for (int i = 0; i < trials; ++i) {
    const Ellipse e = random_ellipse(rng);
    c.worst = std::max(c.worst, ellipse_distance(to_ellipse(to_conic(e)), e));
  }
  return c;
}

inline PropertyCheck check_exact_fit(int trials = 500, std::uint64_t seed = 14) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
  PropertyCheck c{"exact-data ellipse fit, a/b <= 50", 0.0, 1e-7};
  for (int i = 0; i < trials; ++i) {
    const Ellipse e = random_ellipse(rng);
    const auto pts = sample_ellipse(e, 36, ph(rng));
    c.worst = std::max(c.worst, ellipse_distance(fit_ellipse(pts), e));
  }
  return c;
}

inline PropertyCheck check_projection_equivariance(int trials = 500, std::uint64_t seed = 15) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ax(0.2, 1.0);
  PropertyCheck c{"dual-quadric projection under joint rigid motion", 0.0, 1e-10};
  for (int i = 0; i < trials; ++i) {
    const EllipsoidShape s{Vec3(u(rng), u(rng), u(rng)), Vec3(ax(rng), ax(rng), ax(rng)), random_rotation(rng)};
    const Vec3 eye = s.center + 6.0 * random_unit(rng);
    const CameraView cam = aim("p", eye, s.center);
    const Mat3 r = random_rotation(rng);
    const Vec3 t(3.0 * u(rng), 3.0 * u(rng), 3.0 * u(rng));

    // Moving both the quadric and the camera: X -> M X, P -> P M^-1.
    const Mat4 m = rigid_transform(r, t);
    const DualQuadric q = encode_ellipsoid(s);
    const DualQuadric qm{m * q.m * m.transpose()};
    const ProjectionMap p{cam.projection()};
    const ProjectionMap pm{cam.projection() * m.inverse()};
    const Mat3 a = project_dual_quadric(p, q).conic.m;
    const Mat3 b = project_dual_quadric(pm, qm).conic.m;
    c.worst = std::max(c.worst, homogeneous_distance(a, b));
  }
  return c;
}

inline PropertyCheck check_ellipsoid_codec(int trials = 1000, std::uint64_t seed = 16) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-3.0, 3.0), ax(0.1, 2.0);
  PropertyCheck c{"decode(encode(shape)) = shape", 0.0, 1e-9};
  for (int i = 0; i < trials; ++i) {
    Vec3 axes(ax(rng), ax(rng), ax(rng));
    std::sort(axes.data(), axes.data() + 3, std::greater<>());
    const EllipsoidShape s{Vec3(u(rng), u(rng), u(rng)), axes, random_rotation(rng)};
    const EllipsoidShape d = decode_ellipsoid(encode_ellipsoid(s));
    double err = std::max((d.center - s.center).norm(), (d.axes - s.axes).norm());
    // Axis directions are defined up to sign.
    for (int k = 0; k < 3; ++k)
      err = std::max(err, 1.0 - std::abs(d.rotation.col(k).dot(s.rotation.col(k))));
    c.worst = std::max(c.worst, err);
  }
  return c;
}

inline std::vector<PropertyCheck> run_geometry_properties() {
  return {check_reflection_involution(), check_adjoint_identity(), check_conic_round_trip(),
          check_exact_fit(),             check_projection_equivariance(), check_ellipsoid_codec()};
}

}  // namespace jt
