#include "poseconsist/image.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace poseconsist {

void Intrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("intrinsics: focal lengths must be positive");
  }
}

Mat3 Intrinsics::matrix() const {
  Mat3 k;
  k << fx, 0.0, cx,
       0.0, fy, cy,
       0.0, 0.0, 1.0;
  return k;
}

Mat3 Intrinsics::inverse_matrix() const {
  Mat3 k;
  k << 1.0 / fx, 0.0, -cx / fx,
       0.0, 1.0 / fy, -cy / fy,
       0.0, 0.0, 1.0;
  return k;
}

size_t count_valid(const ValidityMask& mask) {
  return static_cast<size_t>(std::count_if(mask.data.begin(), mask.data.end(),
                                           [](std::uint8_t m) { return m != 0; }));
}

ScalarMap ImageGrid::grayscale() const {
  ScalarMap g(height, width, 0.0);
  for (int c = 0; c < channels; ++c) {
    const auto p = plane(c);
    for (size_t i = 0; i < g.size(); ++i) g.data[i] += p[i];
  }
  for (auto& x : g.data) x /= channels;
  return g;
}

void validate_image(const ImageGrid& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw std::invalid_argument("image: channels must be 1 or 3, got " +
                                std::to_string(image.channels));
  }
  if (image.height < kMinImageSide || image.width < kMinImageSide) {
    throw std::invalid_argument("image: height and width must be at least 8");
  }
  if (image.data.size() != image.plane_size() * image.channels) {
    throw std::invalid_argument("image: data size does not match dimensions");
  }
  for (double x : image.data) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("image: value outside [0, 1]");
  }
}

void validate_depth(const DepthMap& depth, double d_max) {
  if (depth.data.size() != static_cast<size_t>(depth.height) * depth.width) {
    throw std::invalid_argument("depth: data size does not match dimensions");
  }
  for (double d : depth.data) {
    if (!(d > 0.0 && d <= d_max)) {
      throw std::invalid_argument("depth: value outside (0, " + std::to_string(d_max) + "]");
    }
  }
}

}  // namespace poseconsist
