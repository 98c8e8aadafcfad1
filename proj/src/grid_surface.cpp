#include <algorithm>
#include <cmath>

#include "jolimas/surfaces.hpp"

namespace jolimas {

namespace {

// Fill of the `hole` cells: an onion peel from the valid border (each cell
// takes the mean of its already known 4-neighbours), then Gauss-Seidel sweeps
// of 4-neighbour averaging until the largest update falls below `tol`. The
// peel keeps the sweep count small on large holes.
template <typename T, typename Norm>
void diffuse_fill(std::vector<T>& values, const std::vector<char>& hole, int w, int h, const T& init, Norm norm,
                  double tol) {
  std::vector<std::size_t> cells;
  std::vector<char> known(hole.size());
  for (std::size_t i = 0; i < hole.size(); ++i) {
    known[i] = !hole[i];
    if (hole[i]) cells.push_back(i);
  }
  if (cells.empty()) return;
  const auto neighbours = [&](std::size_t i, auto&& f) {
    const int u = int(i % std::size_t(w)), v = int(i / std::size_t(w));
    if (u > 0) f(i - 1);
    if (u + 1 < w) f(i + 1);
    if (v > 0) f(i - std::size_t(w));
    if (v + 1 < h) f(i + std::size_t(w));
  };

  std::vector<std::size_t> front, next;
  for (std::size_t i : cells) {
    bool edge = false;
    neighbours(i, [&](std::size_t j) { edge = edge || known[j]; });
    if (edge) front.push_back(i);
  }
  std::vector<char> queued(hole.size());
  for (std::size_t i : front) queued[i] = 1;
  while (!front.empty()) {
    for (std::size_t i : front) {
      T acc = init * 0.0;
      int n = 0;
      neighbours(i, [&](std::size_t j) {
        if (known[j]) {
          acc += values[j];
          ++n;
        }
      });
      values[i] = n ? T(acc / double(n)) : init;
    }
    next.clear();
    for (std::size_t i : front) known[i] = 1;
    for (std::size_t i : front)
      neighbours(i, [&](std::size_t j) {
        if (!known[j] && !queued[j]) {
          queued[j] = 1;
          next.push_back(j);
        }
      });
    front.swap(next);
  }
  // Cells never reached have no valid cell in their component.
  for (std::size_t i : cells)
    if (!known[i]) values[i] = init;

  for (int sweep = 0; sweep < 500; ++sweep) {
    double change = 0.0;
    for (std::size_t i : cells) {
      T acc = init * 0.0;
      int n = 0;
      neighbours(i, [&](std::size_t j) {
        acc += values[j];
        ++n;
      });
      const T next_value = acc / double(n);
      change = std::max(change, norm(next_value - values[i]));
      values[i] = next_value;
    }
    if (change < tol) break;
  }
}

// Separable Gaussian with clamped borders.
void gaussian_blur(std::vector<Vec3>& values, int w, int h, double sigma) {
  const int r = int(std::ceil(3.0 * sigma));
  std::vector<double> k(std::size_t(2 * r + 1));
  for (int i = -r; i <= r; ++i) k[std::size_t(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  std::vector<Vec3> tmp(values.size());
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      Vec3 acc = Vec3::Zero();
      for (int d = -r; d <= r; ++d) acc += k[std::size_t(d + r)] * values[std::size_t(v) * w + std::clamp(u + d, 0, w - 1)];
      tmp[std::size_t(v) * w + u] = acc;
    }
  for (int v = 0; v < h; ++v)
    for (int u = 0; u < w; ++u) {
      Vec3 acc = Vec3::Zero();
      for (int d = -r; d <= r; ++d) acc += k[std::size_t(d + r)] * tmp[std::size_t(std::clamp(v + d, 0, h - 1)) * w + u];
      values[std::size_t(v) * w + u] = acc;
    }
}

}  // namespace

GridSurface::GridSurface(CameraView camera, std::vector<double> depth, std::vector<Vec3> normals_world,
                         double normal_smoothing_px)
    : camera_(std::move(camera)), depth_(std::move(depth)), normals_(std::move(normals_world)) {
  camera_.validate();
  const std::size_t n = std::size_t(camera_.width) * std::size_t(camera_.height);
  if (depth_.size() != n || normals_.size() != n)
    throw Error(ErrorCode::InvalidArgument, "grid surface: depth/normal grids must match the camera size");

  std::vector<char> depth_hole(n), normal_hole(n);
  double sum = 0.0;
  std::size_t valid = 0;
  Vec3 mean_n = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    depth_hole[i] = !(std::isfinite(depth_[i]) && depth_[i] > 0.0);
    if (!depth_hole[i]) {
      sum += depth_[i];
      ++valid;
    }
    normal_hole[i] = !(normals_[i].allFinite() && normals_[i].norm() > 0.5);
    if (!normal_hole[i]) mean_n += normals_[i].normalized();
  }
  if (valid == 0) throw Error(ErrorCode::InvalidArgument, "grid surface has no valid depth");
  const double mean_depth = sum / double(valid);
  diffuse_fill(depth_, depth_hole, camera_.width, camera_.height, mean_depth,
               [](double d) { return std::abs(d); }, 1e-9 * mean_depth);
  diffuse_fill(normals_, normal_hole, camera_.width, camera_.height, Vec3(mean_n.normalized()),
               [](const Vec3& d) { return d.norm(); }, 1e-9);
  if (!(normal_smoothing_px >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "grid surface: normal smoothing must be non-negative");
  if (normal_smoothing_px > 0.0) gaussian_blur(normals_, camera_.width, camera_.height, normal_smoothing_px);
  for (Vec3& v : normals_) v.normalize();
  const auto [lo, hi] = std::minmax_element(depth_.begin(), depth_.end());
  min_depth_ = *lo;
  max_depth_ = *hi;
}

bool GridSurface::in_grid(const Vec2& px) const {
  return px.x() >= 0.0 && px.y() >= 0.0 && px.x() <= width() - 1.0 && px.y() <= height() - 1.0;
}

double GridSurface::depth(const Vec2& px) const {
  const double u = std::clamp(px.x(), 0.0, width() - 1.0), v = std::clamp(px.y(), 0.0, height() - 1.0);
  const int u0 = std::min(int(u), width() - 2 < 0 ? 0 : width() - 2), v0 = std::min(int(v), height() - 2 < 0 ? 0 : height() - 2);
  const int u1 = std::min(u0 + 1, width() - 1), v1 = std::min(v0 + 1, height() - 1);
  const double fu = u - u0, fv = v - v0;
  return (1 - fu) * (1 - fv) * depth_at(u0, v0) + fu * (1 - fv) * depth_at(u1, v0) + (1 - fu) * fv * depth_at(u0, v1) +
         fu * fv * depth_at(u1, v1);
}

Vec3 GridSurface::normal(const Vec2& px) const {
  const double u = std::clamp(px.x(), 0.0, width() - 1.0), v = std::clamp(px.y(), 0.0, height() - 1.0);
  const int u0 = std::min(int(u), width() - 2 < 0 ? 0 : width() - 2), v0 = std::min(int(v), height() - 2 < 0 ? 0 : height() - 2);
  const int u1 = std::min(u0 + 1, width() - 1), v1 = std::min(v0 + 1, height() - 1);
  const double fu = u - u0, fv = v - v0;
  const Vec3 n = (1 - fu) * (1 - fv) * normal_at_pixel(u0, v0) + fu * (1 - fv) * normal_at_pixel(u1, v0) +
                 (1 - fu) * fv * normal_at_pixel(u0, v1) + fu * fv * normal_at_pixel(u1, v1);
  return n.normalized();
}

Vec3 GridSurface::position(const Vec2& px) const {
  const double d = depth(px);
  const Vec3 xc(d * (px.x() - camera_.cx) / camera_.fx, d * (px.y() - camera_.cy) / camera_.fy, d);
  return camera_.rotation.transpose() * (xc - camera_.translation);
}

std::optional<SurfacePoint> GridSurface::intersect(const Vec3& origin, const Vec3& dir) const {
  const Vec3 cam_center = camera_.center();
  if ((origin - cam_center).norm() <= 1e-9 * std::max(1.0, max_depth_)) {
    const Vec3 dc = camera_.rotation * dir;
    if (dc.z() <= 0.0) return std::nullopt;
    const Vec2 px = camera_.project(origin + dir);
    if (!in_grid(px)) return std::nullopt;
    return SurfacePoint{position(px), normal(px)};
  }
  // March along the ray comparing sample depth with the grid depth.
  const double t_end = (origin - cam_center).norm() + 2.0 * max_depth_;
  const double base_step = 0.5 * min_depth_ / std::max(camera_.fx, camera_.fy);
  double prev_t = 0.0;
  std::optional<double> prev_diff;
  for (double t = 0.0; t <= t_end;) {
    const Vec3 x = origin + t * dir;
    const double z = camera_.depth(x);
    const Vec2 px = z > 0.0 ? camera_.project(x) : Vec2(-1.0, -1.0);
    std::optional<double> diff;
    if (z > 0.0 && in_grid(px)) diff = depth(px) - z;
    if (diff && prev_diff && *prev_diff > 0.0 && *diff <= 0.0) {
      double lo = prev_t, hi = t;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        const Vec3 xm = origin + mid * dir;
        const double dm = depth(camera_.project(xm)) - camera_.depth(xm);
        (dm > 0.0 ? lo : hi) = mid;
      }
      const Vec2 hit_px = camera_.project(origin + hi * dir);
      return SurfacePoint{position(hit_px), normal(hit_px)};
    }
    prev_diff = diff;
    prev_t = t;
    const double footprint = std::max(base_step, 0.5 * std::max(z, min_depth_) / std::max(camera_.fx, camera_.fy));
    t += diff ? std::max(footprint, 0.25 * std::abs(*diff)) : footprint * 8.0;
  }
  return std::nullopt;
}

SurfacePoint GridSurface::closest(const Vec3& p, const Vec3& hint) const {
  const Vec3 seed = camera_.depth(p) > 0.0 ? p : hint;
  Vec2 px = camera_.project(seed);
  px = Vec2(std::clamp(px.x(), 0.0, width() - 1.0), std::clamp(px.y(), 0.0, height() - 1.0));
  for (int it = 0; it < 30; ++it) {
    const Vec3 q = position(px);
    const Vec3 n = normal(px);
    const Vec3 target = p - (p - q).dot(n) * n;
    Vec2 next = camera_.project(target);
    next = Vec2(std::clamp(next.x(), 0.0, width() - 1.0), std::clamp(next.y(), 0.0, height() - 1.0));
    const double moved = (next - px).norm();
    px = next;
    if (moved < 1e-9) break;
  }
  return {position(px), normal(px)};
}

}  // namespace jolimas
