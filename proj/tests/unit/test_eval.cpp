#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace jt;

namespace {

// Boundary distance along a ray by bisection on the implicit form; the
// metric's closed-form ray_exit is not used here.
double exit_by_bisection(const Ellipse& e, const Vec2& origin, const Vec2& dir) {
  double lo = 0.0, hi = 1.0;
  while (e.contains(origin + hi * dir)) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (e.contains(origin + mid * dir) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double oracle_percent(const Ellipse& p, const Ellipse& d, int w, int h, int rays = 36) {
  const Vec2 anchor = 0.5 * (p.center + d.center);
  double sum = 0.0;
  for (int k = 0; k < rays; ++k) {
    const double phi = 2 * kPi * k / rays;
    const Vec2 u(std::cos(phi), std::sin(phi));
    sum += std::abs(exit_by_bisection(p, anchor, u) - exit_by_bisection(d, anchor, u));
  }
  return 100.0 * sum / rays / std::hypot(double(w), double(h));
}

std::uint64_t fnv1a(const std::vector<unsigned char>& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

MorphSequenceConfig tiny_morph() {
  MorphSequenceConfig seq;
  seq.steps = 2;
  seq.views_per_step = 4;
  seq.kappa_max = 0.2;
  return seq;
}

}  // namespace

TEST(EllipseError, IdenticalIsZero) {
  const Ellipse e{Vec2(300, 200), 40, 25, 0.7};
  const PredictionError err = ellipse_error(e, e, 640, 480);
  EXPECT_EQ(err.distances.size(), 36u);
  EXPECT_NEAR(err.percent, 0.0, 1e-12);
}

TEST(EllipseError, ConcentricCircles) {
  const Ellipse a{Vec2(320, 240), 10, 10, 0.0}, b{Vec2(320, 240), 20, 20, 0.0};
  EXPECT_NEAR(ellipse_error(a, b, 640, 480).percent, 1.25, 1e-9);
}

TEST(EllipseError, TranslatedCircleMatchesOracle) {
  for (double d : {2.0, 5.0, 12.0}) {
    const Ellipse a{Vec2(300 - d / 2, 200), 30, 30, 0.0}, b{Vec2(300 + d / 2, 200), 30, 30, 0.0};
    const double got = ellipse_error(a, b, 640, 480).percent;
    EXPECT_NEAR(got, oracle_percent(a, b, 640, 480), 1e-9);
    // Continuum limit: mean |cos| = 2 / pi.
    EXPECT_NEAR(got * 8.0, (2.0 / kPi) * d, 0.01 * d);
  }
}

TEST(EllipseError, RandomPairsMatchOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> c(280, 360), ax(10, 60), th(0, kPi);
  for (int i = 0; i < 50; ++i) {
    const Ellipse p = Ellipse{Vec2(c(rng), c(rng) - 80), ax(rng), ax(rng), th(rng)}.normalized();
    const Ellipse d = Ellipse{p.center + Vec2(3, -2), ax(rng), ax(rng), th(rng)}.normalized();
    const PredictionError err = ellipse_error(p, d, 640, 480);
    if (!err.midpoint_anchor) continue;
    EXPECT_NEAR(err.percent, oracle_percent(p, d, 640, 480), 1e-8);
  }
}

TEST(EllipseError, Symmetric) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> c(200, 400), ax(10, 60), th(0, kPi);
  for (int i = 0; i < 100; ++i) {
    const Ellipse p{Vec2(c(rng), c(rng)), ax(rng), ax(rng), th(rng)};
    const Ellipse d{Vec2(c(rng), c(rng)), ax(rng), ax(rng), th(rng)};
    EXPECT_NEAR(ellipse_error(p, d, 640, 480).percent, ellipse_error(d, p, 640, 480).percent, 1e-9);
  }
}

TEST(EllipseError, InvariantUnderRotationAboutAnchor) {
  const Ellipse p{Vec2(300, 220), 40, 20, 0.3}, d{Vec2(310, 215), 35, 22, 0.5};
  const double base = ellipse_error(p, d, 640, 480).percent;
  const Vec2 anchor = 0.5 * (p.center + d.center);
  // Rotations by multiples of the ray spacing map the ray set onto itself.
  for (int k = 1; k < 6; ++k) {
    const double r = 2 * kPi * k / 36;
    const Eigen::Rotation2Dd rot(r);
    const auto turn = [&](const Ellipse& e) {
      return Ellipse{anchor + rot * (e.center - anchor), e.a, e.b, std::fmod(e.theta + r, kPi)};
    };
    EXPECT_NEAR(ellipse_error(turn(p), turn(d), 640, 480).percent, base, 1e-9);
  }
}

TEST(EllipseError, DisjointFallsBackToPolarPoints) {
  const Ellipse p{Vec2(100, 100), 10, 10, 0.0}, d{Vec2(200, 100), 10, 10, 0.0};
  const PredictionError err = ellipse_error(p, d, 640, 480);
  EXPECT_FALSE(err.midpoint_anchor);
  EXPECT_NEAR(err.percent, 100.0 * 100.0 / 800.0, 1e-9);
}

TEST(Spearman, Examples) {
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {10, 20, 30, 40}), 1.0, 1e-12);
  EXPECT_NEAR(spearman({1, 2, 3, 4}, {4, 3, 2, 1}), -1.0, 1e-12);
  // Monotone but nonlinear.
  EXPECT_NEAR(spearman({1, 2, 3, 4, 5}, {1, 4, 9, 16, 1000}), 1.0, 1e-12);
  // Ties share the mean rank: ranks (1.5, 1.5, 3) vs (1, 2, 3).
  EXPECT_NEAR(spearman({1, 1, 2}, {1, 2, 3}), std::sqrt(3.0) / 2.0, 1e-12);
  EXPECT_TRUE(std::isnan(spearman({1, 1, 1}, {1, 2, 3})));
}

TEST(Overlay, CoincidentEllipsesShowOnlyPredicted) {
  const Image img(120, 90);
  const Ellipse e{Vec2(60, 45), 30, 18, 0.4};
  const ColorImage out = overlay_image(img, &e, &e);
  int green = 0, blue = 0;
  for (std::size_t i = 0; i < out.rgb.size(); i += 3) {
    green += out.rgb[i + 1] == 255;
    blue += out.rgb[i + 2] == 255;
  }
  EXPECT_EQ(green, 0);
  EXPECT_GT(blue, 100);
  EXPECT_EQ(out.width, 120);
  EXPECT_EQ(out.height, 90);
}

TEST(Overlay, GoldenBytes) {
  Image img(64, 48);
  for (int v = 0; v < 48; ++v)
    for (int u = 0; u < 64; ++u) img.at(u, v) = float((u + 2 * v) % 17) / 16.0f;
  const Ellipse det{Vec2(30.2, 22.7), 14.5, 9.25, 0.6}, pred{Vec2(33.0, 21.0), 12.0, 10.0, 2.1};
  const ColorImage out = overlay_image(img, &det, &pred);
  TempDir dir("overlay_golden");
  write_ppm(out, dir.path() / "o.ppm");
  const std::string bytes = slurp(dir.path() / "o.ppm");
  // Frozen from the first run of this renderer.
  EXPECT_EQ(fnv1a(out.rgb), 0x52a388ee50bb612cull) << std::hex << fnv1a(out.rgb);
  EXPECT_EQ(bytes.size(), 13u + out.rgb.size());
}

TEST(Experiments, TinyExp2IsDeterministic) {
  ExperimentOptions opts;
  TempDir a("exp2_a"), b("exp2_b");
  opts.out_dir = a.path();
  opts.overlay_stride = 3;
  const ExperimentReport r1 = run_exp2(tiny_morph(), opts);
  opts.out_dir = b.path();
  const ExperimentReport r2 = run_exp2(tiny_morph(), opts);
  ASSERT_EQ(r1.frames.size(), 2u * 4u * 2u);
  EXPECT_EQ(slurp(a.path() / "exp2.csv"), slurp(b.path() / "exp2.csv"));
  const std::string overlay = "overlay_canonical_" + r1.frames[0].frame_id + ".ppm";
  EXPECT_FALSE(slurp(a.path() / overlay).empty());
  EXPECT_EQ(slurp(a.path() / overlay), slurp(b.path() / overlay));
  const std::string csv = slurp(a.path() / "exp2.csv");
  EXPECT_EQ(csv.rfind("frame_id,kappa,mode,percent_error,n_failed_directions,pb_error_px\n", 0), 0u);
  const ModeSummary s = r1.summary(ModelMode::Canonical);
  EXPECT_EQ(s.failed, 0);
  EXPECT_LT(s.mean, 1.0);
  const Json report = read_json_file(a.path() / "report.json");
  EXPECT_TRUE(report.contains("metric"));
  EXPECT_EQ(report["summary"]["canonical"]["evaluated"].get<int>(), 8);
}

TEST(Experiments, Exp1LeavesOneOut) {
  const ExperimentReport r = run_exp1(tiny_morph(), ExperimentOptions{});
  ASSERT_EQ(r.frames.size(), 16u);
  const ModeSummary s = r.summary(ModelMode::Canonical);
  EXPECT_EQ(s.failed, 0);
  EXPECT_LT(s.mean, 2.5);
}
