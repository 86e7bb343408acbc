#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "poseconsist/lie.h"

namespace poseconsist {

struct Intrinsics {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;

  // Throws std::invalid_argument unless fx > 0 and fy > 0.
  void validate() const;
  Mat3 matrix() const;
  Mat3 inverse_matrix() const;
};

// Row-major H×W scalar field. u indexes columns, v rows.
template <typename T>
struct Grid {
  int height = 0;
  int width = 0;
  std::vector<T> data;

  Grid() = default;
  Grid(int h, int w, T fill = T{}) : height(h), width(w), data(static_cast<size_t>(h) * w, fill) {}

  size_t size() const { return data.size(); }
  T& operator()(int v, int u) { return data[static_cast<size_t>(v) * width + u]; }
  const T& operator()(int v, int u) const { return data[static_cast<size_t>(v) * width + u]; }
  bool same_shape(int h, int w) const { return height == h && width == w; }
  bool operator==(const Grid&) const = default;
};

using DepthMap = Grid<double>;
using ValidityMask = Grid<std::uint8_t>;
using ScalarMap = Grid<double>;

size_t count_valid(const ValidityMask& mask);

// Planar H×W×C image, values in [0, 1].
struct ImageGrid {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  ImageGrid() = default;
  ImageGrid(int h, int w, int c, double fill = 0.0)
      : height(h), width(w), channels(c), data(static_cast<size_t>(h) * w * c, fill) {}

  size_t plane_size() const { return static_cast<size_t>(height) * width; }
  double& at(int c, int v, int u) { return data[c * plane_size() + static_cast<size_t>(v) * width + u]; }
  double at(int c, int v, int u) const { return data[c * plane_size() + static_cast<size_t>(v) * width + u]; }
  std::span<double> plane(int c) { return {data.data() + c * plane_size(), plane_size()}; }
  std::span<const double> plane(int c) const { return {data.data() + c * plane_size(), plane_size()}; }
  bool operator==(const ImageGrid&) const = default;

  // Channel mean.
  ScalarMap grayscale() const;
};

// Per-pixel reprojected coordinates [û, v̂].
struct PixelCoords {
  ScalarMap u;
  ScalarMap v;
};

inline constexpr int kMinImageSide = 8;
inline constexpr double kDefaultMaxDepth = 80.0;

// Throws std::invalid_argument naming the offending property.
void validate_image(const ImageGrid& image);
void validate_depth(const DepthMap& depth, double d_max = kDefaultMaxDepth);

}  // namespace poseconsist
