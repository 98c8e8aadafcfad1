#include "jolimas/detect.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

namespace jolimas {

double Image::sample(double x, double y) const {
  x = std::clamp(x, 0.0, double(width - 1));
  y = std::clamp(y, 0.0, double(height - 1));
  const int u0 = std::min(int(x), width - 1), v0 = std::min(int(y), height - 1);
  const int u1 = std::min(u0 + 1, width - 1), v1 = std::min(v0 + 1, height - 1);
  const double fu = x - u0, fv = y - v0;
  return (1 - fu) * (1 - fv) * at(u0, v0) + fu * (1 - fv) * at(u1, v0) + (1 - fu) * fv * at(u0, v1) +
         fu * fv * at(u1, v1);
}

Vec2 Blob::centroid() const {
  Vec2 c = Vec2::Zero();
  for (const auto& p : pixels) c += p.cast<double>();
  return pixels.empty() ? c : Vec2(c / double(pixels.size()));
}

std::vector<Blob> segment(const Image& image, double threshold, int min_area) {
  std::vector<int> label(image.data.size(), -1);
  std::vector<Blob> blobs;
  std::deque<Eigen::Vector2i> queue;
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      const std::size_t idx = std::size_t(v) * std::size_t(image.width) + std::size_t(u);
      if (label[idx] >= 0 || !(image.data[idx] >= threshold)) continue;
      Blob blob;
      blob.min_u = blob.max_u = u;
      blob.min_v = blob.max_v = v;
      label[idx] = int(blobs.size());
      queue.push_back({u, v});
      while (!queue.empty()) {
        const Eigen::Vector2i p = queue.front();
        queue.pop_front();
        blob.pixels.push_back(p);
        blob.min_u = std::min(blob.min_u, p.x());
        blob.max_u = std::max(blob.max_u, p.x());
        blob.min_v = std::min(blob.min_v, p.y());
        blob.max_v = std::max(blob.max_v, p.y());
        for (int dv = -1; dv <= 1; ++dv)
          for (int du = -1; du <= 1; ++du) {
            const int nu = p.x() + du, nv = p.y() + dv;
            if ((du == 0 && dv == 0) || !image.inside(nu, nv)) continue;
            const std::size_t n = std::size_t(nv) * std::size_t(image.width) + std::size_t(nu);
            if (label[n] >= 0 || !(image.data[n] >= threshold)) continue;
            label[n] = int(blobs.size());
            queue.push_back({nu, nv});
          }
      }
      blobs.push_back(std::move(blob));
    }
  }
  std::erase_if(blobs, [&](const Blob& b) { return b.area() < min_area; });
  std::stable_sort(blobs.begin(), blobs.end(), [](const Blob& a, const Blob& b) { return a.area() > b.area(); });
  if (blobs.empty()) throw Error(ErrorCode::NoSpecularity, "no component above threshold " + std::to_string(threshold));
  return blobs;
}

std::vector<Eigen::Vector2i> trace_boundary(const Blob& blob) {
  if (blob.pixels.empty()) return {};
  const int w = blob.max_u - blob.min_u + 3, h = blob.max_v - blob.min_v + 3;
  std::vector<char> mask(std::size_t(w) * std::size_t(h), 0);
  const auto cell = [&](int u, int v) -> char& {
    return mask[std::size_t(v - blob.min_v + 1) * std::size_t(w) + std::size_t(u - blob.min_u + 1)];
  };
  for (const auto& p : blob.pixels) cell(p.x(), p.y()) = 1;
  const auto inside = [&](const Eigen::Vector2i& p) {
    return p.x() >= blob.min_u - 1 && p.x() <= blob.max_u + 1 && p.y() >= blob.min_v - 1 && p.y() <= blob.max_v + 1 &&
           cell(p.x(), p.y()) != 0;
  };

  Eigen::Vector2i start{0, 0};
  bool found = false;
  for (int v = blob.min_v; v <= blob.max_v && !found; ++v)
    for (int u = blob.min_u; u <= blob.max_u && !found; ++u)
      if (cell(u, v)) {
        start = {u, v};
        found = true;
      }

  // Clockwise on screen (v down) starting west.
  static const std::array<Eigen::Vector2i, 8> dirs{Eigen::Vector2i{-1, 0}, {-1, -1}, {0, -1}, {1, -1},
                                                   {1, 0},                 {1, 1},   {0, 1},  {-1, 1}};
  const auto dir_index = [&](const Eigen::Vector2i& d) {
    for (int k = 0; k < 8; ++k)
      if (dirs[std::size_t(k)] == d) return k;
    return 0;
  };

  std::vector<Eigen::Vector2i> out{start};
  const Eigen::Vector2i start_back = start + dirs[0];
  Eigen::Vector2i cur = start, back = start_back;
  const std::size_t limit = 4 * blob.pixels.size() + 8;
  while (out.size() < limit) {
    const int b = dir_index(back - cur);
    Eigen::Vector2i next = cur;
    Eigen::Vector2i prev_checked = back;
    bool moved = false;
    for (int k = 1; k <= 8; ++k) {
      const Eigen::Vector2i cand = cur + dirs[std::size_t((b + k) % 8)];
      if (inside(cand)) {
        next = cand;
        moved = true;
        break;
      }
      prev_checked = cand;
    }
    if (!moved) break;  // isolated pixel
    cur = next;
    back = prev_checked;
    if (cur == start && back == start_back) break;
    if (cur == start) {
      // Entered the start from another side; keep tracing without duplicating it.
      out.push_back(cur);
      continue;
    }
    out.push_back(cur);
  }
  if (out.size() > 1 && out.back() == start) out.pop_back();
  return out;
}

std::vector<Vec2> extract_contour(const Image& image, const Blob& blob, double threshold) {
  const auto boundary = trace_boundary(blob);
  const Vec2 centre = blob.centroid();
  std::vector<Vec2> out;
  out.reserve(boundary.size());
  for (const auto& p : boundary) {
    const int u = p.x(), v = p.y();
    const auto I = [&](int uu, int vv) {
      return double(image.at(std::clamp(uu, 0, image.width - 1), std::clamp(vv, 0, image.height - 1)));
    };
    Vec2 grad(0.5 * (I(u + 1, v) - I(u - 1, v)), 0.5 * (I(u, v + 1) - I(u, v - 1)));
    Vec2 dir = -grad;
    if (dir.norm() < 1e-12) dir = p.cast<double>() - centre;
    if (dir.norm() < 1e-12) dir = Vec2(1.0, 0.0);
    dir.normalize();
    const Vec2 base = p.cast<double>();
    double prev_t = 0.0, prev_i = I(u, v), t_cross = 0.5;
    for (double t = 0.25; t <= 2.0 + 1e-12; t += 0.25) {
      const Vec2 q = base + t * dir;
      const double iq = image.sample(q.x(), q.y());
      if (iq < threshold) {
        t_cross = prev_i > iq ? prev_t + (prev_i - threshold) / (prev_i - iq) * (t - prev_t) : t;
        break;
      }
      prev_t = t;
      prev_i = iq;
    }
    out.push_back(base + t_cross * dir);
  }
  return out;
}

Vec2 brightest_point(const Image& image, const Blob& blob, double top_fraction) {
  if (blob.pixels.empty()) throw Error(ErrorCode::InvalidArgument, "empty blob");
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& p : blob.pixels) {
    const double i = image.at(p.x(), p.y());
    lo = std::min(lo, i);
    hi = std::max(hi, i);
  }
  const double cut = hi - top_fraction * (hi - lo);
  Vec2 acc = Vec2::Zero();
  double wsum = 0.0;
  for (const auto& p : blob.pixels) {
    const double i = image.at(p.x(), p.y());
    if (i < cut) continue;
    const double w = hi > lo ? i - cut : 1.0;
    acc += w * p.cast<double>();
    wsum += w;
  }
  if (wsum <= 0.0) {
    for (const auto& p : blob.pixels)
      if (image.at(p.x(), p.y()) >= cut) {
        acc += p.cast<double>();
        wsum += 1.0;
      }
  }
  return acc / wsum;
}

std::size_t associate_blob(const Image& image, const std::vector<Blob>& blobs, const Vec2& previous,
                           double top_fraction) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < blobs.size(); ++i) {
    const double d = (brightest_point(image, blobs[i], top_fraction) - previous).norm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Detection detect_specularity(const Image& image, const std::string& view_id, const DetectConfig& config,
                             const std::optional<Vec2>& previous) {
  const auto blobs = segment(image, config.threshold, config.min_area);
  const Blob& blob = previous ? blobs[associate_blob(image, blobs, *previous, config.top_fraction)] : blobs.front();
  Detection det;
  det.view_id = view_id;
  det.brightest_px = brightest_point(image, blob, config.top_fraction);
  det.contour_px = extract_contour(image, blob, config.threshold);
  det.ellipse = fit_ellipse(det.contour_px);
  det.clipped = blob.touches_border(image.width, image.height);
  return det;
}

SpecularObservation lift_detection(const CameraView& view, const SurfaceModel& surface, const Detection& det,
                                   const DetectConfig& config) {
  if (det.clipped && config.reject_clipped)
    throw Error(ErrorCode::ClippedObservation, "view '" + det.view_id + "': specularity touches the image border");
  SpecularObservation obs;
  obs.view_id = det.view_id;
  obs.contour_px = det.contour_px;
  obs.brightest_px = det.brightest_px;
  obs.ellipse_img = det.ellipse;
  const Vec3 c = view.center();
  const auto pb = surface.intersect_ray(c, view.ray_direction(det.brightest_px));
  if (!pb) throw Error(ErrorCode::BackprojectionMiss, "view '" + det.view_id + "': brightest point misses the surface");
  obs.pb = *pb;
  obs.contour_s.reserve(det.contour_px.size());
  for (const Vec2& px : det.contour_px) {
    const auto hit = surface.intersect_ray(c, view.ray_direction(px));
    if (!hit) throw Error(ErrorCode::BackprojectionMiss, "view '" + det.view_id + "': contour ray misses the surface");
    obs.contour_s.push_back(hit->position);
  }
  return obs;
}

SpecularObservation lift_observation(const CameraView& view, const SurfaceModel& surface, const Image& image,
                                     const Blob& blob, const DetectConfig& config) {
  Detection det;
  det.view_id = view.id;
  det.brightest_px = brightest_point(image, blob, config.top_fraction);
  det.contour_px = extract_contour(image, blob, config.threshold);
  det.ellipse = fit_ellipse(det.contour_px);
  det.clipped = blob.touches_border(image.width, image.height);
  return lift_detection(view, surface, det, config);
}

SpecularObservation observe(const CameraView& view, const SurfaceModel& surface, const Image& image,
                            const DetectConfig& config) {
  return lift_detection(view, surface, detect_specularity(image, view.id, config), config);
}

}  // namespace jolimas
