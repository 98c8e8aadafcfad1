#include <gtest/gtest.h>

#include <random>

#include "model_fixtures.hpp"

using namespace jt;

namespace {

// Plane scene observed from 6 arc cameras, shared by several tests.
const std::vector<ViewObservation>& plane_inputs() {
  static const std::vector<ViewObservation> in = [] {
    const Scene s = plane_scene();
    return observe_views(s, arc_cameras(s.light, 6));
  }();
  return in;
}

const std::vector<ViewObservation>& cylinder_inputs() {
  static const std::vector<ViewObservation> in = [] {
    Scene s = plane_scene();
    s.surface = morph_surface({0.5}, SheetExtent{});
    return observe_views(s, arc_cameras(s.light, 6));
  }();
  return in;
}

}  // namespace

TEST(Reconstruct, OracleRecoveryForThreeToEightViews) {
  const Mat4 truth = encode_ellipsoid(kOracleShape).m;
  for (int m = 3; m <= 8; ++m) {
    const auto views = oracle_views(kOracleShape, m);
    const JolimasModel model = reconstruct(views);
    EXPECT_LT(homogeneous_distance(model.q_star.m, truth), 1e-8) << "m = " << m;
    EXPECT_LT((model.shape.center - kOracleShape.center).norm(), 1e-6);
    EXPECT_NEAR(model.q_star.m.norm(), 1.0, 1e-12);
    EXPECT_LT(model.q_star.m(3, 3), 0.0);
    EXPECT_EQ(model.source_view_ids.size(), std::size_t(m));
  }
}

TEST(Reconstruct, TwoViewsAreDegenerate) {
  const auto views = oracle_views(kOracleShape, 2);
  try {
    reconstruct(views);
    FAIL() << "expected DegenerateConfiguration";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
}

TEST(Reconstruct, VechRoundTrip) {
  Mat4 m;
  m << 1, 2, 3, 4, 2, 5, 6, 7, 3, 6, 8, 9, 4, 7, 9, 10;
  const auto v = vech(m);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(v(i), i + 1);
  EXPECT_EQ(unvech4(v), m);
}

TEST(Reconstruct, ModeNames) {
  EXPECT_EQ(parse_mode("canonical"), ModelMode::Canonical);
  EXPECT_EQ(parse_mode("dual"), ModelMode::DualBaseline);
  EXPECT_EQ(to_string(ModelMode::DualBaseline), "dual");
  EXPECT_THROW(parse_mode("other"), Error);
}

TEST(CanonicalView, PlaneWarpMatchesDirectProjection) {
  const Scene s = plane_scene();
  const auto& in = plane_inputs()[2];
  const ForwardWarp fw = forward_warp(in.obs, s.surface, LightModel::point(s.light), in.view.center());
  const CanonicalView cv = make_canonical_view(in.obs, fw.canonical, in.view);
  std::vector<Vec3> crossings;
  for (const auto& p : fw.crossings.points)
    if (p) crossings.push_back(p->position);
  const CanonicalView direct = make_canonical_view(in.obs.view_id, in.view, fw.canonical.plane(), crossings);
  EXPECT_LT(homogeneous_distance(cv.conic.m, direct.conic.m), 1e-6);
  EXPECT_LT(cv.fit_rms, 0.2);
  const Vec4 mirrored = reflect_across_plane(cv.tangent) * in.view.center().homogeneous();
  EXPECT_LT((cv.virtual_camera.center() - mirrored.head<3>() / mirrored.w()).norm(), 1e-9);
}

TEST(Pipeline, ReprojectionConsistency) {
  ReconstructionReport rep;
  const JolimasModel model = reconstruct_from_observations(morph_surface({0.5}, SheetExtent{}), cylinder_inputs(),
                                                           PipelineConfig{}, &rep);
  ASSERT_EQ(rep.canonical_views.size(), 6u);
  for (const auto& cv : rep.canonical_views) {
    const Mat3 projected = dual(project_dual_quadric(cv.virtual_camera, model.q_star).conic).m;
    EXPECT_LT(homogeneous_distance(projected, cv.conic.m), 1e-3) << cv.view_id;
  }
}

TEST(Pipeline, ModesAgreeOnPlane) {
  const SurfaceModel plane = morph_surface({0.0}, SheetExtent{});
  PipelineConfig canonical, dual;
  dual.mode = ModelMode::DualBaseline;
  const JolimasModel a = reconstruct_from_observations(plane, plane_inputs(), canonical);
  const JolimasModel b = reconstruct_from_observations(plane, plane_inputs(), dual);
  EXPECT_LT(homogeneous_distance(a.q_star.m, b.q_star.m), 1e-6);
}

TEST(Pipeline, ModelSitsNearLight) {
  const JolimasModel model =
      reconstruct_from_observations(morph_surface({0.5}, SheetExtent{}), cylinder_inputs(), PipelineConfig{});
  EXPECT_LT((model.shape.center - plane_scene().light).norm(), 0.1);
}

TEST(Pipeline, LightFromReflections) {
  const auto light = estimate_light_from_reflections(plane_inputs());
  ASSERT_TRUE(light);
  EXPECT_LT((*light - plane_scene().light).norm(), 0.02);
  // One view repeated: all rays coincide, no meeting point.
  const std::vector<ViewObservation> same(4, plane_inputs()[0]);
  EXPECT_FALSE(estimate_light_from_reflections(same));
}

TEST(PredictBrightestPoint, PlaneMirrorMidpoint) {
  const SurfaceModel plane(Plane{PlaneH{Vec3::UnitZ(), 0.0}, PlaneExtent{}});
  const CameraView cam = aim("c", Vec3(1, 0, 2), Vec3(0.5, 0, 0));
  const SurfacePoint pb = predict_brightest_point(plane, cam, Vec3(0, 0, 2));
  EXPECT_LT((pb.position - Vec3(0.5, 0, 0)).norm(), 1e-9);
}

TEST(PredictBrightestPoint, SphereSymmetry) {
  const SurfaceModel sphere(Sphere{Vec3::Zero(), 1.0});
  const CameraView cam = aim("c", Vec3(-1.5, 0, 3), Vec3::Zero());
  const SurfacePoint pb = predict_brightest_point(sphere, cam, Vec3(1.5, 0, 3));
  EXPECT_LT(std::hypot(pb.position.x(), pb.position.y()), 1e-6);
  EXPECT_NEAR(pb.position.z(), 1.0, 1e-9);
}

TEST(PredictBrightestPoint, NoVisibleReflection) {
  const SurfaceModel plane(Plane{PlaneH{Vec3::UnitZ(), 0.0}, PlaneExtent{Vec3::Zero(), Vec3::UnitX(), 0.1, 0.1}});
  const CameraView cam = aim("c", Vec3(0.3, 0, 3), Vec3::Zero());
  try {
    predict_brightest_point(plane, cam, Vec3(8, 0, 0.1));
    FAIL() << "expected NoVisibleReflection";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoVisibleReflection);
  }
}

TEST(Predict, BrightestPointWithinOnePixelOfDetection) {
  const SurfaceModel s = morph_surface({0.5}, SheetExtent{});
  for (const auto& in : cylinder_inputs()) {
    const SurfacePoint pb = predict_brightest_point(s, in.view, plane_scene().light);
    EXPECT_LT((in.view.project(pb.position) - in.obs.brightest_px).norm(), 1.0) << in.view.id;
  }
}

TEST(Predict, BrightestPointFromModelCentre) {
  // The fitted ellipsoid centre sits a few centimetres behind the light along
  // the viewing direction, which moves P_B by 2-4 px at this scale.
  const SurfaceModel s = morph_surface({0.5}, SheetExtent{});
  const JolimasModel model = reconstruct_from_observations(s, cylinder_inputs(), PipelineConfig{});
  for (const auto& in : cylinder_inputs()) {
    const SurfacePoint pb = predict_brightest_point(s, in.view, model.shape.center);
    EXPECT_LT((in.view.project(pb.position) - in.obs.brightest_px).norm(), 5.0) << in.view.id;
  }
}

TEST(Predict, SelfPredictionWithinOnePercent) {
  const SurfaceModel s = morph_surface({0.5}, SheetExtent{});
  const JolimasModel model = reconstruct_from_observations(s, cylinder_inputs(), PipelineConfig{});
  for (const auto& in : cylinder_inputs()) {
    const PredictedSpecularity p = predict(model, in.view, s);
    EXPECT_LT(ellipse_error(p, in.obs, in.view.width, in.view.height).percent, 1.0) << in.view.id;
  }
}

TEST(Predict, PlaneModesCoincide) {
  const SurfaceModel plane = morph_surface({0.0}, SheetExtent{});
  const JolimasModel model = reconstruct_from_observations(plane, plane_inputs(), PipelineConfig{});
  for (const auto& in : plane_inputs()) {
    const auto a = predict(model, in.view, plane);
    const auto b = predict_dual_baseline(model, in.view, plane);
    EXPECT_LT(ellipse_error(a.ellipse_img, b.ellipse_img, in.view.width, in.view.height).percent, 0.1);
  }
}

TEST(Predict, RigidMotionEquivariance) {
  const SurfaceModel s = morph_surface({0.5}, SheetExtent{});
  const JolimasModel model = reconstruct_from_observations(s, cylinder_inputs(), PipelineConfig{});
  const CameraView& view = cylinder_inputs()[3].view;
  const Mat3 r = Eigen::AngleAxisd(0.7, Vec3(0.2, 1, 0.4).normalized()).toRotationMatrix();
  const Vec3 t(0.3, -1.2, 0.8);

  JolimasModel moved = model;
  const Mat4 m = rigid_transform(r, t);
  moved.q_star.m = m * model.q_star.m * m.transpose();
  moved.shape = decode_ellipsoid(moved.q_star);
  CameraView moved_view = view;
  moved_view.rotation = view.rotation * r.transpose();
  moved_view.translation = view.translation - moved_view.rotation * t;

  const auto a = predict(model, view, s);
  const auto b = predict(moved, moved_view, s.transformed(r, t));
  EXPECT_LT((a.ellipse_img.center - b.ellipse_img.center).norm(), 1e-4);
  EXPECT_NEAR(a.ellipse_img.a, b.ellipse_img.a, 1e-4);
  EXPECT_NEAR(a.ellipse_img.b, b.ellipse_img.b, 1e-4);
}

TEST(ModelFile, SaveLoadSaveIsByteIdentical) {
  TempDir dir("model");
  const JolimasModel model = reconstruct(oracle_views(kOracleShape, 6));
  save_model(model, dir.path() / "a.json");
  save_model(load_model(dir.path() / "a.json"), dir.path() / "b.json");
  EXPECT_EQ(slurp(dir.path() / "a.json"), slurp(dir.path() / "b.json"));
  const JolimasModel back = load_model(dir.path() / "a.json");
  EXPECT_EQ(back.q_star.m, model.q_star.m);
  EXPECT_EQ(back.source_view_ids, model.source_view_ids);
}

TEST(ModelFile, TruncatedIsParseError) {
  const std::string text = model_to_string(reconstruct(oracle_views(kOracleShape, 6)));
  try {
    model_from_string(text.substr(0, text.size() / 2));
    FAIL() << "expected ParseError";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(ModelFile, HandWrittenUnitSphereLoadsAndPredicts) {
  const JolimasModel model = load_model(std::filesystem::path(JOLIMAS_FIXTURE_DIR) / "unit_sphere_model.json");
  EXPECT_LT(model.shape.center.norm(), 1e-12);
  EXPECT_LT((model.shape.axes - Vec3::Ones()).norm(), 1e-12);
  EXPECT_EQ(model.mode, ModelMode::Canonical);

  // Light-sized sphere at the origin over a floor at z = -3.
  const SurfaceModel floor(Plane{PlaneH{Vec3::UnitZ(), 3.0}, std::nullopt});
  const Vec3 eye(2.0, 0.5, 1.0);
  const SurfacePoint pb = predict_brightest_point(floor, aim("f", eye, Vec3(0, 0, -3)), Vec3::Zero());
  const CameraView cam = aim("f", eye, pb.position);
  const auto p = predict(model, cam, floor);
  EXPECT_LT((p.ellipse_img.center - Vec2(cam.cx, cam.cy)).norm(), 50.0);
  EXPECT_GT(p.ellipse_img.b, 1.0);
  EXPECT_EQ(p.failed_directions, 0);
}
