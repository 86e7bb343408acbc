#pragma once

// Per-pixel kernels behind view synthesis. The functions in `kernels` split
// rows across OpenMP threads; every pixel is written by exactly one thread and
// nothing is reduced, so output does not depend on the thread count. The
// `kernels::serial` versions are straightforward single-threaded references
// kept for tests and benchmarks.

#include "poseconsist/image.h"
#include "poseconsist/lie.h"

namespace poseconsist {

struct PhotometricConfig {
  double alpha = 0.85;
  double ssim_c1 = 0.01 * 0.01;
  double ssim_c2 = 0.03 * 0.03;

  void validate() const;
};

// 3×3 reflection-padded means of x and x² for one image; depends only on the
// target frame, so it is computed once and reused for every warp.
struct WindowMoments {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> mean;     // planar, like ImageGrid
  std::vector<double> mean_sq;
};

namespace kernels {

// Reflection without repeating the edge sample: −1 → 1, n → n − 2.
inline int reflect(int i, int n) { return i < 0 ? -i : (i >= n ? 2 * n - 2 - i : i); }

// Inside [0, width−1]×[0, height−1] up to round-off, so that an exact border
// pixel stays valid after a warp by the identity.
inline constexpr double kBoundsSlack = 1e-9;
inline bool in_image(double u, double v, int width, int height) {
  return u >= -kBoundsSlack && v >= -kBoundsSlack && u <= width - 1 + kBoundsSlack &&
         v <= height - 1 + kBoundsSlack;
}

void reproject(const DepthMap& depth, const RigidPose& pose, const Intrinsics& k,
               PixelCoords& coords, ValidityMask& valid);

// Invalid input coordinates produce 0 and valid = false. Coordinates within
// the bounds slack are clamped onto the border.
void sample_bilinear(const ImageGrid& src, const PixelCoords& coords,
                     const ValidityMask& valid_in, ImageGrid& out, ValidityMask& valid_out);

// Samples where `valid` is set, clamping coordinates into the image; writes 0
// elsewhere. Used when the validity pattern is held fixed across nearby
// parameter values.
void sample_bilinear_clamped(const ImageGrid& src, const PixelCoords& coords,
                             const ValidityMask& valid, ImageGrid& out);

WindowMoments window_moments(const ImageGrid& image);

// Per-pixel (α/2)(1 − SSIM) + (1 − α)|x − y|, averaged over channels.
void photometric_error_map(const ImageGrid& target, const WindowMoments& target_moments,
                           const ImageGrid& synthesized, const PhotometricConfig& cfg,
                           ScalarMap& out);

namespace serial {

void reproject(const DepthMap& depth, const RigidPose& pose, const Intrinsics& k,
               PixelCoords& coords, ValidityMask& valid);
void sample_bilinear(const ImageGrid& src, const PixelCoords& coords,
                     const ValidityMask& valid_in, ImageGrid& out, ValidityMask& valid_out);
void photometric_error_map(const ImageGrid& target, const ImageGrid& synthesized,
                           const PhotometricConfig& cfg, ScalarMap& out);

}  // namespace serial
}  // namespace kernels
}  // namespace poseconsist
