#include "poseconsist/kernels.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace poseconsist {

void PhotometricConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw std::invalid_argument("photometric: alpha must lie in [0, 1]");
  }
  if (!(ssim_c1 > 0.0) || !(ssim_c2 > 0.0)) {
    throw std::invalid_argument("photometric: SSIM stabilizers must be positive");
  }
}

namespace kernels {
namespace {

inline double bilinear(std::span<const double> plane, int width, int height, double u, double v) {
  int u0 = std::min(static_cast<int>(std::floor(u)), width - 2);
  int v0 = std::min(static_cast<int>(std::floor(v)), height - 2);
  const double a = u - u0;
  const double b = v - v0;
  const double* row0 = plane.data() + static_cast<size_t>(v0) * width + u0;
  const double* row1 = row0 + width;
  return (1.0 - b) * ((1.0 - a) * row0[0] + a * row0[1]) + b * ((1.0 - a) * row1[0] + a * row1[1]);
}

// Separable 3×3 box mean with reflection padding.
void box_mean(const double* in, int height, int width, double* tmp, double* out) {
#pragma omp parallel for schedule(static)
  for (int v = 0; v < height; ++v) {
    const double* r = in + static_cast<size_t>(v) * width;
    double* t = tmp + static_cast<size_t>(v) * width;
    for (int u = 0; u < width; ++u) {
      t[u] = r[reflect(u - 1, width)] + r[u] + r[reflect(u + 1, width)];
    }
  }
  constexpr double kNinth = 1.0 / 9.0;
#pragma omp parallel for schedule(static)
  for (int v = 0; v < height; ++v) {
    const double* up = tmp + static_cast<size_t>(reflect(v - 1, height)) * width;
    const double* mid = tmp + static_cast<size_t>(v) * width;
    const double* down = tmp + static_cast<size_t>(reflect(v + 1, height)) * width;
    double* o = out + static_cast<size_t>(v) * width;
    for (int u = 0; u < width; ++u) o[u] = (up[u] + mid[u] + down[u]) * kNinth;
  }
}

}  // namespace

void reproject(const DepthMap& depth, const RigidPose& pose, const Intrinsics& k,
               PixelCoords& coords, ValidityMask& valid) {
  const int h = depth.height;
  const int w = depth.width;
  coords.u = ScalarMap(h, w);
  coords.v = ScalarMap(h, w);
  valid = ValidityMask(h, w, 0);
  // K R K⁻¹ applied to [u, v, 1] scaled by depth, plus K t.
  const Mat3 m = k.matrix() * pose.rotation * k.inverse_matrix();
  const Vec3 kt = k.matrix() * pose.translation;

#pragma omp parallel for schedule(static)
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const double d = depth(v, u);
      const double x = d * (m(0, 0) * u + m(0, 1) * v + m(0, 2)) + kt.x();
      const double y = d * (m(1, 0) * u + m(1, 1) * v + m(1, 2)) + kt.y();
      const double z = d * (m(2, 0) * u + m(2, 1) * v + m(2, 2)) + kt.z();
      if (d > 0.0 && z > 0.0) {
        const double pu = x / z;
        const double pv = y / z;
        coords.u(v, u) = pu;
        coords.v(v, u) = pv;
        valid(v, u) = in_image(pu, pv, w, h) ? 1 : 0;
      } else {
        coords.u(v, u) = -1.0;
        coords.v(v, u) = -1.0;
      }
    }
  }
}

void sample_bilinear(const ImageGrid& src, const PixelCoords& coords,
                     const ValidityMask& valid_in, ImageGrid& out, ValidityMask& valid_out) {
  const int h = coords.u.height;
  const int w = coords.u.width;
  out = ImageGrid(h, w, src.channels, 0.0);
  valid_out = ValidityMask(h, w, 0);

#pragma omp parallel for schedule(static)
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!valid_in(v, u)) continue;
      const double su = coords.u(v, u);
      const double sv = coords.v(v, u);
      if (!in_image(su, sv, src.width, src.height)) continue;
      valid_out(v, u) = 1;
      const double cu = std::clamp(su, 0.0, src.width - 1.0);
      const double cv = std::clamp(sv, 0.0, src.height - 1.0);
      for (int c = 0; c < src.channels; ++c) {
        out.at(c, v, u) = bilinear(src.plane(c), src.width, src.height, cu, cv);
      }
    }
  }
}

void sample_bilinear_clamped(const ImageGrid& src, const PixelCoords& coords,
                             const ValidityMask& valid, ImageGrid& out) {
  const int h = coords.u.height;
  const int w = coords.u.width;
  out = ImageGrid(h, w, src.channels, 0.0);
  const double umax = src.width - 1;
  const double vmax = src.height - 1;

#pragma omp parallel for schedule(static)
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!valid(v, u)) continue;
      const double su = std::clamp(coords.u(v, u), 0.0, umax);
      const double sv = std::clamp(coords.v(v, u), 0.0, vmax);
      for (int c = 0; c < src.channels; ++c) {
        out.at(c, v, u) = bilinear(src.plane(c), src.width, src.height, su, sv);
      }
    }
  }
}

WindowMoments window_moments(const ImageGrid& image) {
  WindowMoments m;
  m.height = image.height;
  m.width = image.width;
  m.channels = image.channels;
  const size_t n = image.plane_size();
  m.mean.resize(n * image.channels);
  m.mean_sq.resize(n * image.channels);
  std::vector<double> sq(n), tmp(n);
  for (int c = 0; c < image.channels; ++c) {
    const auto p = image.plane(c);
    for (size_t i = 0; i < n; ++i) sq[i] = p[i] * p[i];
    box_mean(p.data(), image.height, image.width, tmp.data(), m.mean.data() + c * n);
    box_mean(sq.data(), image.height, image.width, tmp.data(), m.mean_sq.data() + c * n);
  }
  return m;
}

void photometric_error_map(const ImageGrid& target, const WindowMoments& tm,
                           const ImageGrid& synth, const PhotometricConfig& cfg,
                           ScalarMap& out) {
  const int h = target.height;
  const int w = target.width;
  const int channels = target.channels;
  const size_t n = target.plane_size();
  out = ScalarMap(h, w, 0.0);

  // Horizontal 3-tap sums of y, y² and xy; reused across calls on a thread.
  thread_local std::vector<double> hy, hyy, hxy;
  hy.resize(n);
  hyy.resize(n);
  hxy.resize(n);
  double* const hy_p = hy.data();
  double* const hyy_p = hyy.data();
  double* const hxy_p = hxy.data();

  const double half_alpha = 0.5 * cfg.alpha;
  const double l1_weight = 1.0 - cfg.alpha;
  const double inv_c = 1.0 / channels;
  constexpr double kNinth = 1.0 / 9.0;

  for (int c = 0; c < channels; ++c) {
    const double* x = target.plane(c).data();
    const double* y = synth.plane(c).data();
    const double* mu_x = tm.mean.data() + c * n;
    const double* e_x2 = tm.mean_sq.data() + c * n;

#pragma omp parallel for schedule(static)
    for (int v = 0; v < h; ++v) {
      const size_t row = static_cast<size_t>(v) * w;
      const double* yr = y + row;
      const double* xr = x + row;
      double* a = hy_p + row;
      double* b = hyy_p + row;
      double* d = hxy_p + row;
      auto tap = [&](int u, int l, int r) {
        a[u] = yr[l] + yr[u] + yr[r];
        b[u] = yr[l] * yr[l] + yr[u] * yr[u] + yr[r] * yr[r];
        d[u] = xr[l] * yr[l] + xr[u] * yr[u] + xr[r] * yr[r];
      };
      tap(0, 1, 1);
      for (int u = 1; u + 1 < w; ++u) tap(u, u - 1, u + 1);
      tap(w - 1, w - 2, w - 2);
    }

#pragma omp parallel for schedule(static)
    for (int v = 0; v < h; ++v) {
      const size_t r0 = static_cast<size_t>(reflect(v - 1, h)) * w;
      const size_t r1 = static_cast<size_t>(v) * w;
      const size_t r2 = static_cast<size_t>(reflect(v + 1, h)) * w;
      double* o = out.data.data() + r1;
      for (int u = 0; u < w; ++u) {
        const double mx = mu_x[r1 + u];
        const double my = (hy_p[r0 + u] + hy_p[r1 + u] + hy_p[r2 + u]) * kNinth;
        const double sx = e_x2[r1 + u] - mx * mx;
        const double sy = (hyy_p[r0 + u] + hyy_p[r1 + u] + hyy_p[r2 + u]) * kNinth - my * my;
        const double sxy = (hxy_p[r0 + u] + hxy_p[r1 + u] + hxy_p[r2 + u]) * kNinth - mx * my;
        const double ssim = ((2.0 * mx * my + cfg.ssim_c1) * (2.0 * sxy + cfg.ssim_c2)) /
                            ((mx * mx + my * my + cfg.ssim_c1) * (sx + sy + cfg.ssim_c2));
        // SSIM ≤ 1 in exact arithmetic; the clamp keeps round-off from making a
        // near-identical warp score below an identical one.
        o[u] += inv_c * (half_alpha * std::max(0.0, 1.0 - ssim) + l1_weight * std::abs(x[r1 + u] - y[r1 + u]));
      }
    }
  }
}

}  // namespace kernels
}  // namespace poseconsist
