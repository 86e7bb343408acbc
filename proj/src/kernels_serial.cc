#include <algorithm>
#include <cmath>

#include "poseconsist/kernels.h"

namespace poseconsist::kernels::serial {

void reproject(const DepthMap& depth, const RigidPose& pose, const Intrinsics& k,
               PixelCoords& coords, ValidityMask& valid) {
  const int h = depth.height;
  const int w = depth.width;
  coords.u = ScalarMap(h, w, -1.0);
  coords.v = ScalarMap(h, w, -1.0);
  valid = ValidityMask(h, w, 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      // Back-project to a 3D point, move it into the other camera, project.
      const Vec3 ray((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
      const Vec3 p = pose.apply(depth(v, u) * ray);
      if (!(depth(v, u) > 0.0) || !(p.z() > 0.0)) continue;
      const double pu = k.fx * p.x() / p.z() + k.cx;
      const double pv = k.fy * p.y() / p.z() + k.cy;
      coords.u(v, u) = pu;
      coords.v(v, u) = pv;
      valid(v, u) = in_image(pu, pv, w, h) ? 1 : 0;
    }
  }
}

void sample_bilinear(const ImageGrid& src, const PixelCoords& coords,
                     const ValidityMask& valid_in, ImageGrid& out, ValidityMask& valid_out) {
  const int h = coords.u.height;
  const int w = coords.u.width;
  out = ImageGrid(h, w, src.channels, 0.0);
  valid_out = ValidityMask(h, w, 0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      if (!valid_in(v, u) || !in_image(coords.u(v, u), coords.v(v, u), src.width, src.height)) continue;
      const double su = std::clamp(coords.u(v, u), 0.0, src.width - 1.0);
      const double sv = std::clamp(coords.v(v, u), 0.0, src.height - 1.0);
      valid_out(v, u) = 1;
      const int u0 = static_cast<int>(std::floor(su));
      const int v0 = static_cast<int>(std::floor(sv));
      for (int c = 0; c < src.channels; ++c) {
        double acc = 0.0;
        for (int dv = 0; dv <= 1; ++dv) {
          for (int du = 0; du <= 1; ++du) {
            const int x = u0 + du;
            const int y = v0 + dv;
            const double wgt = (1.0 - std::abs(su - x)) * (1.0 - std::abs(sv - y));
            if (wgt > 0.0) acc += wgt * src.at(c, y, x);
          }
        }
        out.at(c, v, u) = acc;
      }
    }
  }
}

void photometric_error_map(const ImageGrid& target, const ImageGrid& synthesized,
                           const PhotometricConfig& cfg, ScalarMap& out) {
  const int h = target.height;
  const int w = target.width;
  out = ScalarMap(h, w, 0.0);
  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      double acc = 0.0;
      for (int c = 0; c < target.channels; ++c) {
        double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
        for (int dv = -1; dv <= 1; ++dv) {
          for (int du = -1; du <= 1; ++du) {
            const int y = reflect(v + dv, h);
            const int x = reflect(u + du, w);
            const double a = target.at(c, y, x);
            const double b = synthesized.at(c, y, x);
            sx += a;
            sy += b;
            sxx += a * a;
            syy += b * b;
            sxy += a * b;
          }
        }
        const double mx = sx / 9.0, my = sy / 9.0;
        const double vx = sxx / 9.0 - mx * mx;
        const double vy = syy / 9.0 - my * my;
        const double cxy = sxy / 9.0 - mx * my;
        const double ssim = ((2 * mx * my + cfg.ssim_c1) * (2 * cxy + cfg.ssim_c2)) /
                            ((mx * mx + my * my + cfg.ssim_c1) * (vx + vy + cfg.ssim_c2));
        acc += 0.5 * cfg.alpha * std::max(0.0, 1.0 - ssim) +
               (1.0 - cfg.alpha) * std::abs(target.at(c, v, u) - synthesized.at(c, v, u));
      }
      out(v, u) = acc / target.channels;
    }
  }
}

}  // namespace poseconsist::kernels::serial
