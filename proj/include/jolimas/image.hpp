#pragma once

#include <cstddef>
#include <vector>

namespace jolimas {

// Single-channel intensity grid, row-major, non-negative.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  Image() = default;
  Image(int w, int h, float fill = 0.0f) : width(w), height(h), data(std::size_t(w) * std::size_t(h), fill) {}

  float& at(int u, int v) { return data[std::size_t(v) * std::size_t(width) + std::size_t(u)]; }
  float at(int u, int v) const { return data[std::size_t(v) * std::size_t(width) + std::size_t(u)]; }
  bool inside(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }

  // Bilinear sample with clamp-to-edge.
  double sample(double x, double y) const;
};

// 8-bit RGB raster used for overlays.
struct ColorImage {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;

  ColorImage() = default;
  ColorImage(int w, int h) : width(w), height(h), rgb(std::size_t(w) * std::size_t(h) * 3, 0) {}

  void set(int u, int v, unsigned char r, unsigned char g, unsigned char b) {
    if (u < 0 || v < 0 || u >= width || v >= height) return;
    const std::size_t i = (std::size_t(v) * std::size_t(width) + std::size_t(u)) * 3;
    rgb[i] = r;
    rgb[i + 1] = g;
    rgb[i + 2] = b;
  }
};

}  // namespace jolimas
