#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "geom_properties.hpp"

using namespace jt;

namespace {

// Camera at (0, 0, 5) looking down -z, K = I.
CameraView overhead_unit_camera() {
  CameraView v;
  v.id = "unit";
  v.width = 2;
  v.height = 2;
  v.rotation = Vec3(1.0, -1.0, -1.0).asDiagonal();
  v.translation = -v.rotation * Vec3(0.0, 0.0, 5.0);
  return v;
}

}  // namespace

TEST(Reflection, AxisMirrorIsDiagonal) {
  const Mat4 h = reflect_across_plane(PlaneH{Vec3::UnitZ(), 0.0});
  EXPECT_LT((h - Vec4(1, 1, -1, 1).asDiagonal().toDenseMatrix()).norm(), 1e-15);
}

TEST(Reflection, AcrossOffsetPlane) {
  const Mat4 h = reflect_across_plane(PlaneH{Vec3::UnitZ(), -1.0});
  const Vec4 x = h * Vec4(0, 0, 0, 1);
  EXPECT_NEAR(x.x(), 0.0, 1e-15);
  EXPECT_NEAR(x.z() / x.w(), 2.0, 1e-15);
}

TEST(Reflection, Involution) {
  const auto c = check_reflection_involution();
  EXPECT_TRUE(c.ok()) << c.worst;
}

TEST(MirrorCamera, CenterReflects) {
  const CameraView v = aim("v", Vec3(0, 0, 5), Vec3::Zero());
  const ProjectionMap p = mirror_camera(v, PlaneH{Vec3::UnitZ(), 0.0});
  EXPECT_LT((p.center() - Vec3(0, 0, -5)).norm(), 1e-12);
}

TEST(MirrorCamera, MatchesReflectedProjection) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const CameraView v = aim("v", Vec3(0.3, 0.4, 3.0), Vec3(0.1, 0.0, 0.0));
  const PlaneH plane{random_unit(rng), 0.4};
  const ProjectionMap ps = mirror_camera(v, plane);
  const Mat4 h = reflect_across_plane(plane);
  for (int i = 0; i < 100; ++i) {
    const Vec4 x(u(rng), u(rng), u(rng), 1.0);
    const Vec3 a = ps.matrix * x;
    const Vec3 b = v.projection() * (h * x);
    EXPECT_LT((a - b).norm(), 1e-12 * std::max(1.0, b.norm()));
  }
}

TEST(ProjectDualQuadric, UnitSphereRadiusMatchesRayCasting) {
  const CameraView cam = overhead_unit_camera();
  const auto proj = project_dual_quadric(ProjectionMap{cam.projection()}, DualQuadric{Vec4(1, 1, 1, -1).asDiagonal()});
  ASSERT_FALSE(proj.degenerate);
  const Ellipse e = to_ellipse(dual(proj.conic));
  EXPECT_NEAR(e.a, 1.0 / std::sqrt(24.0), 1e-12);
  EXPECT_NEAR(e.b, 1.0 / std::sqrt(24.0), 1e-12);
  EXPECT_LT(e.center.norm(), 1e-12);

  // Oracle: 10^6 rays through a normalised-image grid; the hit area gives the radius.
  const int n = 1000;
  const double half = 0.3, h = 2.0 * half / n;
  const Vec3 c = cam.center();
  long hits = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const Vec2 px(-half + (i + 0.5) * h, -half + (j + 0.5) * h);
      const Vec3 d = cam.ray_direction(px);
      const double t = -c.dot(d);
      if ((c + t * d).squaredNorm() < 1.0) ++hits;
    }
  const double r = std::sqrt(hits * h * h / kPi);
  EXPECT_NEAR(r, e.a, 2e-4);
}

TEST(ProjectDualQuadric, PointQuadricProjectsToPoint) {
  const CameraView cam = aim("p", Vec3(1, 2, 4), Vec3::Zero());
  const Vec4 x(0.2, -0.1, 0.3, 1.0);
  const Mat34 p = cam.projection();
  const auto proj = project_dual_quadric(ProjectionMap{p}, DualQuadric{x * x.transpose()});
  const Vec3 px = p * x;
  EXPECT_LT(homogeneous_distance(proj.conic.m, Mat3(px * px.transpose())), 1e-12);
}

TEST(ProjectDualQuadric, RigidMotionEquivariance) {
  const auto c = check_projection_equivariance();
  EXPECT_TRUE(c.ok()) << c.worst;
}

TEST(Adjugate, Examples) {
  EXPECT_LT((adjugate(Mat3(Mat3::Identity())) - Mat3::Identity()).norm(), 1e-15);
  const Mat3 d = Vec3(1, 1, -1).asDiagonal();
  EXPECT_LT((adjugate(d) - Mat3(Vec3(-1, -1, 1).asDiagonal())).norm(), 1e-15);
}

TEST(Adjugate, DoubleAdjugateIdentity) {
  const auto c = check_adjoint_identity();
  EXPECT_TRUE(c.ok()) << c.worst;
}

TEST(ConicConversion, UnitCircle) {
  const Conic c = to_conic(Ellipse{});
  EXPECT_LT(homogeneous_distance(c.m, Mat3(Vec3(1, 1, -1).asDiagonal())), 1e-12);
}

TEST(ConicConversion, ShiftedEllipseEntries) {
  Ellipse e;
  e.center = Vec2(3, 2);
  e.a = 2;
  e.b = 1;
  Mat3 expected;
  expected << 0.25, 0, -0.75, 0, 1, -2, -0.75, -2, 9.0 / 4.0 + 3.0;
  EXPECT_LT(homogeneous_distance(to_conic(e).m, expected), 1e-12);
  EXPECT_LT(ellipse_distance(to_ellipse(Conic{expected}), e), 1e-12);
}

TEST(ConicConversion, HyperbolaRejected) {
  try {
    to_ellipse(Conic{Vec3(1, -1, -1).asDiagonal()});
    FAIL() << "expected NotAnEllipse";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAnEllipse);
  }
}

TEST(ConicConversion, RoundTrip) {
  const auto c = check_conic_round_trip();
  EXPECT_TRUE(c.ok()) << c.worst;
}

TEST(FitEllipse, ExactSamples) {
  Ellipse e;
  e.a = 2;
  e.b = 1;
  e.theta = 0.3;
  const auto pts = sample_ellipse(e, 36);
  const Ellipse f = fit_ellipse(pts);
  EXPECT_NEAR(f.center.norm(), 0.0, 1e-9);
  EXPECT_NEAR(f.a, 2.0, 1e-9);
  EXPECT_NEAR(f.b, 1.0, 1e-9);
  EXPECT_NEAR(f.theta, 0.3, 1e-9);
  EXPECT_LT(ellipse_fit_rms(f, pts), 1e-9);
}

TEST(FitEllipse, ExactRecoveryProperty) {
  const auto c = check_exact_fit();
  EXPECT_TRUE(c.ok()) << c.worst;
}

TEST(FitEllipse, NoisyCenter95thPercentile) {
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> noise(0.0, 0.2);
  std::uniform_real_distribution<double> ph(0.0, 2.0 * kPi);
  Ellipse e;
  e.center = Vec2(320, 240);
  e.a = 40;
  e.b = 20;
  e.theta = 0.4;
  std::vector<double> errs;
  for (int t = 0; t < 1000; ++t) {
    auto pts = sample_ellipse(e, 100, ph(rng));
    for (auto& p : pts) p += Vec2(noise(rng), noise(rng));
    errs.push_back((fit_ellipse(pts).center - e.center).norm());
  }
  std::sort(errs.begin(), errs.end());
  EXPECT_LT(errs[949], 0.3);
}

TEST(FitEllipse, CollinearRejected) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 5; ++i) pts.emplace_back(i, 2.0 * i + 1.0);
  try {
    fit_ellipse(pts);
    FAIL() << "expected DegenerateInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateInput);
  }
}

TEST(DecodeEllipsoid, UnitSphere) {
  const EllipsoidShape s = decode_ellipsoid(DualQuadric{Vec4(1, 1, 1, -1).asDiagonal()});
  EXPECT_LT(s.center.norm(), 1e-12);
  EXPECT_LT((s.axes - Vec3::Ones()).norm(), 1e-12);
}

TEST(DecodeEllipsoid, TranslatedSphere) {
  const Mat4 t = translation_transform(Vec3(1, 2, 3));
  const Mat4 q = t * Mat4(Vec4(1, 1, 1, -1).asDiagonal()) * t.transpose();
  const EllipsoidShape s = decode_ellipsoid(DualQuadric{q});
  EXPECT_LT((s.center - Vec3(1, 2, 3)).norm(), 1e-12);
  EXPECT_LT((s.axes - Vec3::Ones()).norm(), 1e-12);
}

TEST(DecodeEllipsoid, HyperboloidRejected) {
  try {
    decode_ellipsoid(DualQuadric{Vec4(1, 1, -1, -1).asDiagonal()});
    FAIL() << "expected NotAnEllipsoid";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotAnEllipsoid);
  }
}

TEST(DecodeEllipsoid, CodecRoundTrip) {
  const auto c = check_ellipsoid_codec();
  EXPECT_TRUE(c.ok()) << c.worst;
}

TEST(CameraView, LookAtProjectsTargetToPrincipalPoint) {
  const CameraView v = aim("v", Vec3(1, 2, 3), Vec3(0.5, 0, 0));
  EXPECT_NO_THROW(v.validate());
  EXPECT_LT((v.project(Vec3(0.5, 0, 0)) - Vec2(v.cx, v.cy)).norm(), 1e-9);
  EXPECT_GT(v.depth(Vec3(0.5, 0, 0)), 0.0);
}
