#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "jolimas/eval.hpp"

namespace jt {

using namespace jolimas;

inline constexpr double kPi = 3.14159265358979323846;

// Camera aimed at `target`, 640x480 unless overridden.
inline CameraView aim(const std::string& id, const Vec3& eye, const Vec3& target, double focal = 700.0,
                      int width = 640, int height = 480) {
  return CameraView::look_at(id, eye, target, Vec3::UnitY(), focal, width, height);
}

// Mirror point of `light` on the plane z = 0 for a viewer at `eye`.
inline Vec3 plane_mirror_point(const Vec3& light, const Vec3& eye) {
  const Vec3 mirrored(light.x(), light.y(), -light.z());
  const double t = eye.z() / (eye.z() + light.z());
  return eye + t * (mirrored - eye);
}

inline Scene plane_scene(const Vec3& light = {0.0, -0.35, 1.0}) {
  Plane p{PlaneH{Vec3::UnitZ(), 0.0}, PlaneExtent{Vec3::Zero(), Vec3::UnitX(), 1.0, 1.0}};
  return Scene{SurfaceModel(p), light, Material{}, {}, 0.0};
}

// Cameras on an arc over the sheet, each aimed at its plane mirror point.
inline std::vector<CameraView> arc_cameras(const Vec3& light, int n, double radius = 1.2, double half_angle = 0.5,
                                           double y = 0.35, double focal = 700.0) {
  std::vector<CameraView> out;
  for (int j = 0; j < n; ++j) {
    const double phi = n == 1 ? 0.0 : -half_angle + 2.0 * half_angle * j / (n - 1);
    const Vec3 eye(radius * std::sin(phi), y, radius * std::cos(phi));
    out.push_back(aim("c" + std::to_string(j), eye, plane_mirror_point(light, eye), focal));
  }
  return out;
}

inline std::vector<Vec2> sample_ellipse(const Ellipse& e, int n, double phase = 0.0) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) pts.push_back(e.point_at(phase + 2.0 * kPi * i / n));
  return pts;
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  return Vec3(g(rng), g(rng), g(rng)).normalized();
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("jolimas_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace jt
