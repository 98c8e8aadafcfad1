#pragma once

// Homogeneous geometry kernel: cameras, planes, reflections, conics,
// dual quadrics and ellipse fitting.
//
// Conventions
//   * CameraView poses map world to camera: x_cam = R * x_world + t.
//   * Intrinsics are in pixels; integer pixel coordinates are pixel centres.
//   * Conic:      x^T C x = 0 for image points x = (u, v, 1).
//   * DualConic:  l^T C* l = 0 for tangent lines l.
//   * DualQuadric: pi^T Q* pi = 0 for tangent planes pi.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Dense>

#include "jolimas/error.hpp"

namespace jolimas {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

struct CameraView {
  std::string id;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;
  Mat3 rotation = Mat3::Identity();  // world -> camera
  Vec3 translation = Vec3::Zero();

  Mat3 intrinsics() const;
  Mat34 projection() const;
  Vec3 center() const;
  // Depth of a world point along the optical axis.
  double depth(const Vec3& x) const;
  Vec2 project(const Vec3& x) const;
  // Unit world-frame direction of the ray through pixel `px`.
  Vec3 ray_direction(const Vec2& px) const;
  double diagonal() const;

  // Throws InvalidArgument when the invariants do not hold.
  void validate() const;

  static CameraView look_at(std::string id, const Vec3& eye, const Vec3& target, const Vec3& up,
                            double focal, int width, int height);
};

// 3x4 projection, defined up to scale. Mirrored cameras live here because
// their rotation part has determinant -1.
struct ProjectionMap {
  Mat34 matrix = Mat34::Zero();

  Vec3 center() const;
  Vec2 project(const Vec3& x) const;
};

struct PlaneH {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;  // normal . x + offset = 0

  static PlaneH from_point_normal(const Vec3& point, const Vec3& normal);
  double signed_distance(const Vec3& x) const { return normal.dot(x) + offset; }
  Vec3 project(const Vec3& x) const { return x - signed_distance(x) * normal; }
  // Orthonormal in-plane basis (u, v) with u x v = normal.
  std::pair<Vec3, Vec3> basis() const;
};

struct Conic {
  Mat3 m = Mat3::Identity();
};

struct DualConic {
  Mat3 m = Mat3::Identity();
};

struct Ellipse {
  Vec2 center = Vec2::Zero();
  double a = 1.0;      // semi-major
  double b = 1.0;      // semi-minor
  double theta = 0.0;  // major-axis orientation in [0, pi)

  Vec2 point_at(double t) const;
  bool contains(const Vec2& p) const;
  // Distance from `origin` along unit `dir` to the boundary (largest positive root).
  std::optional<double> ray_exit(const Vec2& origin, const Vec2& dir) const;
  // Boundary point at polar angle `phi` seen from the ellipse centre.
  Vec2 polar_point(double phi) const;
  // a >= b, theta in [0, pi).
  Ellipse normalized() const;
};

struct DualQuadric {
  Mat4 m = Mat4::Identity();
};

struct EllipsoidShape {
  Vec3 center = Vec3::Zero();
  Vec3 axes = Vec3::Ones();  // semi-axes, descending
  Mat3 rotation = Mat3::Identity();  // columns are the axis directions
};

// Homogeneous normalisation: unit Frobenius norm, largest-magnitude entry positive.
template <typename Derived>
typename Derived::PlainObject normalize_homogeneous(const Eigen::MatrixBase<Derived>& m) {
  typename Derived::PlainObject out = m;
  const double norm = out.norm();
  if (norm == 0.0) return out;
  out /= norm;
  Eigen::Index r = 0, c = 0;
  out.cwiseAbs().maxCoeff(&r, &c);
  if (out(r, c) < 0.0) out = -out;
  return out;
}

// Frobenius distance between two homogeneous matrices after normalisation.
template <typename A, typename B>
double homogeneous_distance(const Eigen::MatrixBase<A>& x, const Eigen::MatrixBase<B>& y) {
  return (normalize_homogeneous(x) - normalize_homogeneous(y)).norm();
}

Mat4 reflect_across_plane(const PlaneH& plane);
Mat4 translation_transform(const Vec3& t);
Mat4 rigid_transform(const Mat3& rotation, const Vec3& translation);

ProjectionMap mirror_camera(const CameraView& view, const PlaneH& plane);

struct ProjectedConic {
  DualConic conic;
  bool degenerate = false;  // quadric centre on the principal plane or rank < 3
};

ProjectedConic project_dual_quadric(const ProjectionMap& projection, const DualQuadric& quadric);

Mat3 adjugate(const Mat3& m);
Mat4 adjugate(const Mat4& m);
inline DualConic dual(const Conic& c) { return {adjugate(c.m)}; }
inline Conic dual(const DualConic& c) { return {adjugate(c.m)}; }
inline DualQuadric dual_quadric_adjugate(const DualQuadric& q) { return {adjugate(q.m)}; }

Conic to_conic(const Ellipse& e);
// Throws NotAnEllipse when the conic is not a real ellipse.
Ellipse to_ellipse(const Conic& c);

// Direct least-squares ellipse fit with the ellipse-specific constraint.
// Throws DegenerateInput for fewer than 5 points or a rank-deficient scatter.
Ellipse fit_ellipse(std::span<const Vec2> points);
// RMS algebraic-to-geometric residual approximation (Sampson distance), pixels.
double ellipse_fit_rms(const Ellipse& e, std::span<const Vec2> points);

DualQuadric encode_ellipsoid(const EllipsoidShape& shape);
// Throws NotAnEllipsoid when the centred block is not positive definite.
EllipsoidShape decode_ellipsoid(const DualQuadric& quadric);

double wrap_angle_pi(double theta);

}  // namespace jolimas
