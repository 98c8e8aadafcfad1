#pragma once

// Rendered single-view fixtures for the warp checks shared by the unit tests
// and the acceptance gate.

#include <algorithm>
#include <string>
#include <vector>

#include "support.hpp"

namespace jt {

struct WarpFixture {
  std::string name;
  Scene scene;
  CameraView cam;
  SpecularObservation obs;
};

inline const Vec3 kFixtureLight{0.0, -0.35, 1.0};
inline const Vec3 kFixtureEye{0.25, 0.35, 1.15};

// Camera at `eye` aimed at the specular point of `surface`, observation lifted
// from a render with the default material and detector.
inline WarpFixture make_fixture(const std::string& name, const SurfaceModel& surface, const Vec3& light = kFixtureLight,
                                const Vec3& eye = kFixtureEye) {
  WarpFixture f{name, Scene{surface, light, Material{}, {}, 0.0}, {}, {}};
  const auto mp = find_mirror_point(surface, light, eye);
  if (!mp) throw Error(ErrorCode::NoVisibleReflection, name + ": no specular point");
  f.cam = aim(name, eye, mp->point.position);
  f.obs = observe(f.cam, surface, render(f.scene, f.cam), DetectConfig{});
  return f;
}

inline std::vector<WarpFixture> standard_fixtures() {
  return {make_fixture("plane", morph_surface({0.0}, SheetExtent{})),
          make_fixture("cylinder", morph_surface({1.0}, SheetExtent{})),
          make_fixture("sphere", SurfaceModel(Sphere{Vec3(0, 0, -1.0), 1.0})),
          make_fixture("ellipsoid",
                       SurfaceModel(EllipsoidSurface{Vec3(0, 0, -0.3), Vec3(0.6, 0.4, 0.3), Mat3::Identity()}))};
}

inline double major_diameter(const std::vector<Vec3>& pts) {
  double d = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, (pts[i] - pts[j]).norm());
  return d;
}

struct RoundTrip {
  double worst_relative = 0.0;  // worst per-direction distance / major diameter
  int compared = 0;
};

// forward_warp then inverse_warp with the true light; compares each inverse
// point with the contour crossing of the same direction.
inline RoundTrip warp_round_trip(const WarpFixture& f) {
  const LightModel light = LightModel::point(f.scene.light);
  const Vec3 c = f.cam.center();
  const ForwardWarp fw = forward_warp(f.obs, f.scene.surface, light, c);
  const InverseWarp iw = inverse_warp(fw.fan, f.obs.pb, f.scene.surface, light, c, fw.crossings.step);
  const double diam = major_diameter(f.obs.contour_s);
  RoundTrip rt;
  for (std::size_t i = 0; i < iw.points.size(); ++i) {
    if (!iw.points[i] || !fw.crossings.points[i]) continue;
    rt.worst_relative =
        std::max(rt.worst_relative, (iw.points[i]->position - fw.crossings.points[i]->position).norm() / diam);
    ++rt.compared;
  }
  return rt;
}

struct FanComparison {
  double worst_relative = 0.0;  // against the kappa = 0 fan, per direction
  int min_surviving = 36;
};

// Limit-angle fans of the morph family seen by one camera and light.
inline FanComparison compare_limit_angle_fans(const std::vector<double>& kappas, const Vec3& light = kFixtureLight,
                                              const Vec3& eye = kFixtureEye) {
  FanComparison out;
  std::vector<double> reference;
  const WarpFixture plane = make_fixture("k0", morph_surface({0.0}, SheetExtent{}), light, eye);
  for (double k : kappas) {
    const SurfaceModel s = morph_surface({k}, SheetExtent{});
    // Same camera for every kappa.
    WarpFixture f{"k", Scene{s, light, Material{}, {}, 0.0}, plane.cam, {}};
    f.obs = observe(f.cam, s, render(f.scene, f.cam), DetectConfig{});
    const ForwardWarp fw = forward_warp(f.obs, s, LightModel::point(light), f.cam.center());
    out.min_surviving = std::min(out.min_surviving, fw.fan.valid());
    if (reference.empty()) {
      reference = fw.fan.alpha_max;
      continue;
    }
    for (std::size_t i = 0; i < reference.size(); ++i) {
      if (!std::isfinite(reference[i]) || !std::isfinite(fw.fan.alpha_max[i])) continue;
      out.worst_relative = std::max(out.worst_relative, std::abs(fw.fan.alpha_max[i] / reference[i] - 1.0));
    }
  }
  return out;
}

}  // namespace jt
