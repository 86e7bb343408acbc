#pragma once

#include <span>

#include "poseconsist/image.h"
#include "poseconsist/kernels.h"
#include "poseconsist/lie.h"

namespace poseconsist {

struct Reprojection {
  PixelCoords coords;
  ValidityMask valid;  // z > 0 and inside the image
};

struct SampledImage {
  ImageGrid image;
  ValidityMask valid;
};

// Where each target pixel lands in the other view: K R D K⁻¹ [u v 1]ᵀ + K t,
// followed by perspective division. Pixels without depth (≤ 0) are invalid.
Reprojection reproject(const DepthMap& depth, const RigidPose& pose, const Intrinsics& k);

SampledImage sample_bilinear(const ImageGrid& src, const PixelCoords& coords,
                             const ValidityMask& valid);

// Reconstructs the target view from `src` given the target's depth and the
// rigid motion from the target camera to the source camera.
SampledImage synthesize_view(const ImageGrid& src, const DepthMap& depth_of_target,
                             const RigidPose& target_to_src, const Intrinsics& k);

ScalarMap photometric_error(const ImageGrid& target, const ImageGrid& synthesized,
                            const PhotometricConfig& cfg = {});

// Mean per-pixel photometric error over valid pixels, 0 when none is valid.
double photometric_loss(const ImageGrid& target, const ImageGrid& synthesized,
                        const ValidityMask& valid, const PhotometricConfig& cfg = {});

struct MinReprojection {
  ScalarMap per_pixel;  // 0 where no source is valid
  ValidityMask valid;   // at least one source valid
  double mean = 0.0;
};

// Per-pixel minimum over the sources that are valid at that pixel.
MinReprojection min_reprojection_loss(const ImageGrid& target,
                                      std::span<const SampledImage> sources,
                                      const PhotometricConfig& cfg = {});
MinReprojection min_reprojection_loss(const ImageGrid& target, const SampledImage& prev,
                                      const SampledImage& next,
                                      const PhotometricConfig& cfg = {});

// Keeps a pixel iff its best warped error is strictly below the best error of
// the unwarped neighbors. Pixels without any valid warp are dropped.
ValidityMask auto_mask(const ImageGrid& target, std::span<const ImageGrid> neighbors,
                       std::span<const SampledImage> synthesized,
                       const PhotometricConfig& cfg = {});
ValidityMask auto_mask(const ImageGrid& target, const ImageGrid& prev, const ImageGrid& next,
                       const SampledImage& synth_prev, const SampledImage& synth_next,
                       const PhotometricConfig& cfg = {});

// Pixels whose whole 3×3 SSIM window is valid. Zero-filled invalid samples
// would otherwise leak into the window statistics of their valid neighbors.
ValidityMask erode_window(const ValidityMask& valid);

// Edge-aware smoothness of the mean-normalized depth: mean over x-differences
// of |δx d̄|·exp(−|δx I|) plus the same along y.
double smoothness_loss(const DepthMap& depth, const ImageGrid& image);

}  // namespace poseconsist
