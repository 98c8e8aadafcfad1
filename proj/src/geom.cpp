#include "jolimas/geom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace jolimas {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OffSurface: return "OffSurface";
    case ErrorCode::NotAnEllipse: return "NotAnEllipse";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::NotAnEllipsoid: return "NotAnEllipsoid";
    case ErrorCode::StalledWalk: return "StalledWalk";
    case ErrorCode::NoCrossing: return "NoCrossing";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::NoSpecularity: return "NoSpecularity";
    case ErrorCode::BackprojectionMiss: return "BackprojectionMiss";
    case ErrorCode::ClippedObservation: return "ClippedObservation";
    case ErrorCode::WarpFailed: return "WarpFailed";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NoVisibleReflection: return "NoVisibleReflection";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

double wrap_angle_pi(double theta) {
  constexpr double pi = std::numbers::pi;
  theta = std::fmod(theta, pi);
  if (theta < 0.0) theta += pi;
  if (theta >= pi) theta -= pi;
  return theta;
}

// ---------------------------------------------------------------- cameras

Mat3 CameraView::intrinsics() const {
  Mat3 k;
  k << fx, 0.0, cx, 0.0, fy, cy, 0.0, 0.0, 1.0;
  return k;
}

Mat34 CameraView::projection() const {
  Mat34 rt;
  rt.leftCols<3>() = rotation;
  rt.col(3) = translation;
  return intrinsics() * rt;
}

Vec3 CameraView::center() const { return -rotation.transpose() * translation; }

double CameraView::depth(const Vec3& x) const { return rotation.row(2).dot(x) + translation.z(); }

Vec2 CameraView::project(const Vec3& x) const {
  const Vec3 xc = rotation * x + translation;
  return {fx * xc.x() / xc.z() + cx, fy * xc.y() / xc.z() + cy};
}

Vec3 CameraView::ray_direction(const Vec2& px) const {
  const Vec3 d_cam((px.x() - cx) / fx, (px.y() - cy) / fy, 1.0);
  return (rotation.transpose() * d_cam).normalized();
}

double CameraView::diagonal() const { return std::hypot(double(width), double(height)); }

void CameraView::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorCode::InvalidArgument, "camera '" + id + "': focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorCode::InvalidArgument, "camera '" + id + "': image size must be positive");
  const double orth = (rotation * rotation.transpose() - Mat3::Identity()).norm();
  if (orth > 1e-6 || rotation.determinant() < 0.0)
    throw Error(ErrorCode::InvalidArgument, "camera '" + id + "': rotation must be a proper rotation");
}

CameraView CameraView::look_at(std::string id, const Vec3& eye, const Vec3& target, const Vec3& up,
                               double focal, int width, int height) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(up);
  if (right.norm() < 1e-9) right = forward.cross(Vec3::UnitX());
  right.normalize();
  const Vec3 down = forward.cross(right);
  CameraView v;
  v.id = std::move(id);
  v.fx = v.fy = focal;
  v.cx = 0.5 * (width - 1);
  v.cy = 0.5 * (height - 1);
  v.width = width;
  v.height = height;
  v.rotation.row(0) = right;
  v.rotation.row(1) = down;
  v.rotation.row(2) = forward;
  v.translation = -v.rotation * eye;
  return v;
}

Vec3 ProjectionMap::center() const {
  Eigen::JacobiSVD<Mat34> svd(matrix, Eigen::ComputeFullV);
  const Vec4 c = svd.matrixV().col(3);
  return c.head<3>() / c(3);
}

Vec2 ProjectionMap::project(const Vec3& x) const {
  const Vec3 h = matrix * x.homogeneous();
  return h.hnormalized();
}

// ---------------------------------------------------------------- planes

PlaneH PlaneH::from_point_normal(const Vec3& point, const Vec3& normal) {
  PlaneH p;
  p.normal = normal.normalized();
  p.offset = -p.normal.dot(point);
  return p;
}

std::pair<Vec3, Vec3> PlaneH::basis() const {
  const Vec3 seed = std::abs(normal.x()) < 0.9 ? Vec3::UnitX() : Vec3::UnitY();
  const Vec3 u = (seed - seed.dot(normal) * normal).normalized();
  return {u, normal.cross(u)};
}

Mat4 reflect_across_plane(const PlaneH& plane) {
  const Vec3& n = plane.normal;
  Mat4 h = Mat4::Identity();
  h.topLeftCorner<3, 3>() -= 2.0 * n * n.transpose();
  h.topRightCorner<3, 1>() = -2.0 * plane.offset * n;
  return h;
}

Mat4 translation_transform(const Vec3& t) {
  Mat4 h = Mat4::Identity();
  h.topRightCorner<3, 1>() = t;
  return h;
}

Mat4 rigid_transform(const Mat3& rotation, const Vec3& translation) {
  Mat4 h = Mat4::Identity();
  h.topLeftCorner<3, 3>() = rotation;
  h.topRightCorner<3, 1>() = translation;
  return h;
}

ProjectionMap mirror_camera(const CameraView& view, const PlaneH& plane) {
  return {view.projection() * reflect_across_plane(plane)};
}

ProjectedConic project_dual_quadric(const ProjectionMap& projection, const DualQuadric& quadric) {
  const Mat34& p = projection.matrix;
  Mat3 c = p * quadric.m * p.transpose();
  c = 0.5 * (c + c.transpose());
  ProjectedConic out{{c}, false};

  const double scale = c.norm();
  if (scale == 0.0 || std::abs(c.determinant()) <= 1e-12 * scale * scale * scale) out.degenerate = true;
  const double q33 = quadric.m(3, 3);
  if (std::abs(q33) > 1e-14 * quadric.m.norm()) {
    const Vec4 centre(quadric.m(0, 3) / q33, quadric.m(1, 3) / q33, quadric.m(2, 3) / q33, 1.0);
    const Vec3 img = p * centre;
    if (std::abs(img.z()) <= 1e-12 * p.norm() * centre.norm()) out.degenerate = true;
  }
  return out;
}

// ---------------------------------------------------------------- duality

Mat3 adjugate(const Mat3& m) {
  Mat3 a;
  a(0, 0) = m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  a(0, 1) = m(0, 2) * m(2, 1) - m(0, 1) * m(2, 2);
  a(0, 2) = m(0, 1) * m(1, 2) - m(0, 2) * m(1, 1);
  a(1, 0) = m(1, 2) * m(2, 0) - m(1, 0) * m(2, 2);
  a(1, 1) = m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0);
  a(1, 2) = m(0, 2) * m(1, 0) - m(0, 0) * m(1, 2);
  a(2, 0) = m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0);
  a(2, 1) = m(0, 1) * m(2, 0) - m(0, 0) * m(2, 1);
  a(2, 2) = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  return a;
}

Mat4 adjugate(const Mat4& m) {
  Mat4 a;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      Mat3 minor;
      for (int i = 0, mi = 0; i < 4; ++i) {
        if (i == r) continue;
        for (int j = 0, mj = 0; j < 4; ++j) {
          if (j == c) continue;
          minor(mi, mj++) = m(i, j);
        }
        ++mi;
      }
      const double sign = ((r + c) % 2 == 0) ? 1.0 : -1.0;
      a(c, r) = sign * minor.determinant();
    }
  }
  return a;
}

// ---------------------------------------------------------------- ellipses

namespace {

Eigen::Matrix2d rotation2(double theta) {
  Eigen::Matrix2d r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

}  // namespace

Vec2 Ellipse::point_at(double t) const {
  return center + rotation2(theta) * Vec2(a * std::cos(t), b * std::sin(t));
}

bool Ellipse::contains(const Vec2& p) const {
  const Vec2 q = rotation2(theta).transpose() * (p - center);
  return (q.x() / a) * (q.x() / a) + (q.y() / b) * (q.y() / b) <= 1.0;
}

std::optional<double> Ellipse::ray_exit(const Vec2& origin, const Vec2& dir) const {
  const Eigen::Matrix2d rt = rotation2(theta).transpose();
  const Vec2 o = rt * (origin - center);
  const Vec2 d = rt * dir;
  const double qa = (d.x() * d.x()) / (a * a) + (d.y() * d.y()) / (b * b);
  const double qb = 2.0 * ((o.x() * d.x()) / (a * a) + (o.y() * d.y()) / (b * b));
  const double qc = (o.x() * o.x()) / (a * a) + (o.y() * o.y()) / (b * b) - 1.0;
  const double disc = qb * qb - 4.0 * qa * qc;
  if (disc < 0.0) return std::nullopt;
  const double t = (-qb + std::sqrt(disc)) / (2.0 * qa);
  if (t < 0.0) return std::nullopt;
  return t;
}

Vec2 Ellipse::polar_point(double phi) const {
  const Vec2 d(std::cos(phi), std::sin(phi));
  const Vec2 l = rotation2(theta).transpose() * d;
  const double r = 1.0 / std::sqrt((l.x() / a) * (l.x() / a) + (l.y() / b) * (l.y() / b));
  return center + r * d;
}

Ellipse Ellipse::normalized() const {
  Ellipse e = *this;
  if (e.b > e.a) {
    std::swap(e.a, e.b);
    e.theta += 0.5 * std::numbers::pi;
  }
  e.theta = wrap_angle_pi(e.theta);
  return e;
}

Conic to_conic(const Ellipse& e) {
  const Eigen::Matrix2d r = rotation2(e.theta);
  const Eigen::Matrix2d a = r * Vec2(1.0 / (e.a * e.a), 1.0 / (e.b * e.b)).asDiagonal() * r.transpose();
  Mat3 c;
  c.topLeftCorner<2, 2>() = a;
  const Vec2 ac = a * e.center;
  c.topRightCorner<2, 1>() = -ac;
  c.bottomLeftCorner<1, 2>() = -ac.transpose();
  c(2, 2) = e.center.dot(ac) - 1.0;
  return {c};
}

Ellipse to_ellipse(const Conic& conic) {
  Mat3 c = 0.5 * (conic.m + conic.m.transpose());
  const double norm = c.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorCode::NotAnEllipse, "zero or non-finite conic");
  c /= norm;

  const Eigen::Matrix2d a2 = c.topLeftCorner<2, 2>();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(a2);
  Vec2 lambda = es.eigenvalues();
  // Definiteness is judged on the quadratic block alone; the constant term
  // grows with the distance of the centre from the origin.
  const double block_max = lambda.cwiseAbs().maxCoeff();
  if (lambda(0) * lambda(1) <= 0.0 || std::min(std::abs(lambda(0)), std::abs(lambda(1))) <= 1e-12 * block_max)
    throw Error(ErrorCode::NotAnEllipse, "quadratic part is not definite");
  const double tol = 1e-10;
  if (lambda(0) < 0.0) {
    c = -c;
    lambda = -lambda;
    std::swap(lambda(0), lambda(1));
  }
  const Eigen::Matrix2d pos = c.topLeftCorner<2, 2>();
  const Vec2 lin = c.topRightCorner<2, 1>();
  const Vec2 centre = -pos.ldlt().solve(lin);
  const double f = c(2, 2) + lin.dot(centre);
  if (f >= -tol) throw Error(ErrorCode::NotAnEllipse, "conic has no real points");

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es2(pos);
  const Vec2 l = es2.eigenvalues();  // ascending: l(0) -> major axis
  Ellipse e;
  e.center = centre;
  e.a = std::sqrt(-f / l(0));
  e.b = std::sqrt(-f / l(1));
  const Vec2 major = es2.eigenvectors().col(0);
  e.theta = wrap_angle_pi(std::atan2(major.y(), major.x()));
  return e;
}

Ellipse fit_ellipse(std::span<const Vec2> points) {
  const Eigen::Index n = static_cast<Eigen::Index>(points.size());
  if (n < 5) throw Error(ErrorCode::DegenerateInput, "ellipse fit needs at least 5 points");

  Vec2 mean = Vec2::Zero();
  for (const Vec2& p : points) mean += p;
  mean /= double(n);
  double spread = 0.0;
  for (const Vec2& p : points) spread += (p - mean).squaredNorm();
  spread = std::sqrt(spread / double(n));
  if (!(spread > 0.0)) throw Error(ErrorCode::DegenerateInput, "coincident points");
  const double s = spread / std::sqrt(2.0);

  Eigen::MatrixXd d1(n, 3), d2(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Vec2 q = (points[std::size_t(i)] - mean) / s;
    d1.row(i) << q.x() * q.x(), q.x() * q.y(), q.y() * q.y();
    d2.row(i) << q.x(), q.y(), 1.0;
  }

  Eigen::MatrixXd design(n, 6);
  design << d1, d2;
  Eigen::JacobiSVD<Eigen::MatrixXd> rank_check(design);
  const auto sv = rank_check.singularValues();
  if (sv(4) <= 1e-10 * sv(0)) throw Error(ErrorCode::DegenerateInput, "scatter matrix is rank deficient");

  const Mat3 s1 = d1.transpose() * d1;
  const Mat3 s2 = d1.transpose() * d2;
  const Mat3 s3 = d2.transpose() * d2;
  const Eigen::FullPivLU<Mat3> s3_lu(s3);
  if (!s3_lu.isInvertible()) throw Error(ErrorCode::DegenerateInput, "collinear points");
  const Mat3 t = -s3_lu.solve(s2.transpose());
  const Mat3 m = s1 + s2 * t;
  Mat3 reduced;
  reduced.row(0) = m.row(2) / 2.0;
  reduced.row(1) = -m.row(1);
  reduced.row(2) = m.row(0) / 2.0;

  Eigen::EigenSolver<Mat3> es(reduced);
  int best = -1;
  double best_abs = 0.0;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(es.eigenvalues()(k).imag()) > 1e-12 * (1.0 + std::abs(es.eigenvalues()(k).real()))) continue;
    const Vec3 v = es.eigenvectors().col(k).real();
    const double cond = 4.0 * v(0) * v(2) - v(1) * v(1);
    if (cond <= 0.0) continue;
    const double mag = std::abs(es.eigenvalues()(k).real());
    if (best < 0 || mag < best_abs) {
      best = k;
      best_abs = mag;
    }
  }
  if (best < 0) throw Error(ErrorCode::DegenerateInput, "no elliptical solution");
  const Vec3 quad = es.eigenvectors().col(best).real();
  const Vec3 lin = t * quad;

  Mat3 cn;
  cn << quad(0), quad(1) / 2.0, lin(0) / 2.0,
        quad(1) / 2.0, quad(2), lin(1) / 2.0,
        lin(0) / 2.0, lin(1) / 2.0, lin(2);
  Mat3 denorm;
  denorm << 1.0 / s, 0.0, -mean.x() / s, 0.0, 1.0 / s, -mean.y() / s, 0.0, 0.0, 1.0;
  try {
    return to_ellipse({denorm.transpose() * cn * denorm});
  } catch (const Error& e) {
    throw Error(ErrorCode::DegenerateInput, std::string("fitted conic rejected: ") + e.what());
  }
}

double ellipse_fit_rms(const Ellipse& e, std::span<const Vec2> points) {
  if (points.empty()) return 0.0;
  const Mat3 c = to_conic(e).m;
  double acc = 0.0;
  for (const Vec2& p : points) {
    const Vec3 x = p.homogeneous();
    const Vec3 g = c * x;
    const double grad = 2.0 * g.head<2>().norm();
    const double r = grad > 0.0 ? x.dot(g) / grad : 0.0;
    acc += r * r;
  }
  return std::sqrt(acc / double(points.size()));
}

// ---------------------------------------------------------------- ellipsoids

DualQuadric encode_ellipsoid(const EllipsoidShape& shape) {
  const Mat3 a = shape.rotation * shape.axes.cwiseAbs2().asDiagonal() * shape.rotation.transpose();
  const Vec3& c = shape.center;
  Mat4 q;
  q.topLeftCorner<3, 3>() = a - c * c.transpose();
  q.topRightCorner<3, 1>() = -c;
  q.bottomLeftCorner<1, 3>() = -c.transpose();
  q(3, 3) = -1.0;
  return {q};
}

EllipsoidShape decode_ellipsoid(const DualQuadric& quadric) {
  Mat4 q = 0.5 * (quadric.m + quadric.m.transpose());
  const double norm = q.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) throw Error(ErrorCode::NotAnEllipsoid, "zero or non-finite quadric");
  if (std::abs(q(3, 3)) <= 1e-12 * norm) throw Error(ErrorCode::NotAnEllipsoid, "Q*[3,3] vanishes");
  q /= -q(3, 3);

  EllipsoidShape shape;
  shape.center = -q.topRightCorner<3, 1>();
  const Mat3 a = q.topLeftCorner<3, 3>() + shape.center * shape.center.transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> es(0.5 * (a + a.transpose()));
  const Vec3 lambda = es.eigenvalues();  // ascending
  if (lambda(0) <= 1e-12 * lambda.cwiseAbs().maxCoeff())
    throw Error(ErrorCode::NotAnEllipsoid, "centred block is not positive definite");
  for (int k = 0; k < 3; ++k) {
    shape.axes(k) = std::sqrt(lambda(2 - k));
    shape.rotation.col(k) = es.eigenvectors().col(2 - k);
  }
  if (shape.rotation.determinant() < 0.0) shape.rotation.col(2) = -shape.rotation.col(2);
  return shape;
}

}  // namespace jolimas
