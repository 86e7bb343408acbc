#include "poseconsist/view_synthesis.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace poseconsist {
namespace {

void require_shape(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(std::string("dimension mismatch: ") + what);
}

}  // namespace

Reprojection reproject(const DepthMap& depth, const RigidPose& pose, const Intrinsics& k) {
  k.validate();
  Reprojection r;
  kernels::reproject(depth, pose, k, r.coords, r.valid);
  return r;
}

SampledImage sample_bilinear(const ImageGrid& src, const PixelCoords& coords,
                             const ValidityMask& valid) {
  require_shape(coords.u.same_shape(valid.height, valid.width) &&
                    coords.v.same_shape(valid.height, valid.width),
                "coordinates vs mask");
  SampledImage s;
  kernels::sample_bilinear(src, coords, valid, s.image, s.valid);
  return s;
}

SampledImage synthesize_view(const ImageGrid& src, const DepthMap& depth_of_target,
                             const RigidPose& target_to_src, const Intrinsics& k) {
  require_shape(depth_of_target.same_shape(src.height, src.width), "source image vs depth");
  const Reprojection r = reproject(depth_of_target, target_to_src, k);
  return sample_bilinear(src, r.coords, r.valid);
}

ScalarMap photometric_error(const ImageGrid& target, const ImageGrid& synthesized,
                            const PhotometricConfig& cfg) {
  require_shape(target.height == synthesized.height && target.width == synthesized.width &&
                    target.channels == synthesized.channels,
                "target vs synthesized");
  ScalarMap out;
  kernels::photometric_error_map(target, kernels::window_moments(target), synthesized, cfg, out);
  return out;
}

double photometric_loss(const ImageGrid& target, const ImageGrid& synthesized,
                        const ValidityMask& valid, const PhotometricConfig& cfg) {
  require_shape(valid.same_shape(target.height, target.width), "target vs mask");
  const ScalarMap err = photometric_error(target, synthesized, cfg);
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < err.size(); ++i) {
    if (valid.data[i]) {
      sum += err.data[i];
      ++n;
    }
  }
  return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

MinReprojection min_reprojection_loss(const ImageGrid& target,
                                      std::span<const SampledImage> sources,
                                      const PhotometricConfig& cfg) {
  MinReprojection r;
  r.per_pixel = ScalarMap(target.height, target.width, 0.0);
  r.valid = ValidityMask(target.height, target.width, 0);
  ScalarMap best(target.height, target.width, std::numeric_limits<double>::infinity());
  for (const auto& s : sources) {
    require_shape(s.valid.same_shape(target.height, target.width), "target vs source mask");
    const ScalarMap err = photometric_error(target, s.image, cfg);
    for (size_t i = 0; i < err.size(); ++i) {
      if (s.valid.data[i] && err.data[i] < best.data[i]) best.data[i] = err.data[i];
    }
  }
  double sum = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < best.size(); ++i) {
    if (std::isinf(best.data[i])) continue;
    r.per_pixel.data[i] = best.data[i];
    r.valid.data[i] = 1;
    sum += best.data[i];
    ++n;
  }
  r.mean = n == 0 ? 0.0 : sum / static_cast<double>(n);
  return r;
}

MinReprojection min_reprojection_loss(const ImageGrid& target, const SampledImage& prev,
                                      const SampledImage& next, const PhotometricConfig& cfg) {
  const SampledImage sources[] = {prev, next};
  return min_reprojection_loss(target, sources, cfg);
}

ValidityMask auto_mask(const ImageGrid& target, std::span<const ImageGrid> neighbors,
                       std::span<const SampledImage> synthesized,
                       const PhotometricConfig& cfg) {
  const MinReprojection warped = min_reprojection_loss(target, synthesized, cfg);
  ScalarMap raw_best(target.height, target.width, std::numeric_limits<double>::infinity());
  for (const auto& n : neighbors) {
    const ScalarMap err = photometric_error(target, n, cfg);
    for (size_t i = 0; i < err.size(); ++i) raw_best.data[i] = std::min(raw_best.data[i], err.data[i]);
  }
  ValidityMask keep(target.height, target.width, 0);
  for (size_t i = 0; i < keep.size(); ++i) {
    keep.data[i] = (warped.valid.data[i] && warped.per_pixel.data[i] < raw_best.data[i]) ? 1 : 0;
  }
  return keep;
}

ValidityMask auto_mask(const ImageGrid& target, const ImageGrid& prev, const ImageGrid& next,
                       const SampledImage& synth_prev, const SampledImage& synth_next,
                       const PhotometricConfig& cfg) {
  const ImageGrid neighbors[] = {prev, next};
  const SampledImage synthesized[] = {synth_prev, synth_next};
  return auto_mask(target, neighbors, synthesized, cfg);
}

ValidityMask erode_window(const ValidityMask& valid) {
  const int h = valid.height;
  const int w = valid.width;
  ValidityMask out(h, w, 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      bool all = true;
      for (int dv = -1; dv <= 1 && all; ++dv) {
        for (int du = -1; du <= 1 && all; ++du) {
          all = valid(kernels::reflect(v + dv, h), kernels::reflect(u + du, w)) != 0;
        }
      }
      out(v, u) = all ? 1 : 0;
    }
  }
  return out;
}

double smoothness_loss(const DepthMap& depth, const ImageGrid& image) {
  require_shape(depth.same_shape(image.height, image.width), "depth vs image");
  const int h = depth.height;
  const int w = depth.width;
  double mean = 0.0;
  for (double d : depth.data) mean += d;
  mean /= static_cast<double>(depth.size());

  auto image_grad = [&](int v0, int u0, int v1, int u1) {
    double g = 0.0;
    for (int c = 0; c < image.channels; ++c) g += std::abs(image.at(c, v1, u1) - image.at(c, v0, u0));
    return g / image.channels;
  };

  double sum_x = 0.0;
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u + 1 < w; ++u) {
      const double dd = std::abs(depth(v, u + 1) / mean - depth(v, u) / mean);
      sum_x += dd * std::exp(-image_grad(v, u, v, u + 1));
    }
  }
  double sum_y = 0.0;
  for (int v = 0; v + 1 < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double dd = std::abs(depth(v + 1, u) / mean - depth(v, u) / mean);
      sum_y += dd * std::exp(-image_grad(v, u, v + 1, u));
    }
  }
  return sum_x / (static_cast<double>(h) * (w - 1)) + sum_y / (static_cast<double>(h - 1) * w);
}

}  // namespace poseconsist
