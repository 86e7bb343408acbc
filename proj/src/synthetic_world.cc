#include "poseconsist/synthetic_world.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "poseconsist/errors.h"

namespace poseconsist {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Texture random_texture(std::mt19937_64& rng, int channels, int components, double f_lo,
                       double f_hi) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Texture tex;
  tex.channels.resize(channels);
  for (auto& ch : tex.channels) {
    double total = 0.0;
    for (int i = 0; i < components; ++i) {
      SinusoidComponent s;
      s.amplitude = 0.5 + 0.5 * unit(rng);
      const double f = f_lo + (f_hi - f_lo) * unit(rng);
      const double dir = kTwoPi * unit(rng);
      s.freq_x = f * std::cos(dir);
      s.freq_y = f * std::sin(dir);
      s.phase = kTwoPi * unit(rng);
      total += s.amplitude;
      ch.push_back(s);
    }
    // Keeps 0.5 ± Σ amplitude inside [0.1, 0.9].
    for (auto& s : ch) s.amplitude *= 0.4 / total;
  }
  return tex;
}

Mat3 rotation_y(double angle) {
  return rotation_exp(Vec3(0.0, angle, 0.0));
}

}  // namespace

void SceneParams::validate() const {
  if (!(camera_height > 0.0)) throw std::invalid_argument("scene.camera_height must be positive");
  if (!(far_wall > 0.0)) throw std::invalid_argument("scene.far_wall must be positive");
  if (!(side_wall > 0.0)) throw std::invalid_argument("scene.side_wall must be positive");
  if (n_walls < 1 || n_walls > 3) throw std::invalid_argument("scene.n_walls must be 1..3");
  if (texture_components < 6 || texture_components > 12) {
    throw std::invalid_argument("scene.texture_components must be 6..12");
  }
  if (channels != 1 && channels != 3) throw std::invalid_argument("scene.channels must be 1 or 3");
  if (!(texture_band_lo > 0.0) || !(texture_band_hi >= texture_band_lo)) {
    throw std::invalid_argument("scene.texture_band must satisfy 0 < lo <= hi");
  }
}

SceneSpec make_scene(const SceneParams& p, std::uint64_t seed) {
  p.validate();
  SceneSpec scene;
  scene.rng_seed = seed;
  std::mt19937_64 rng(seed);

  // Camera frame convention: x right, y down, z forward.
  auto add = [&](Vec3 normal, double offset, double typical_distance) {
    scene.textures.push_back(random_texture(rng, p.channels, p.texture_components,
                                            p.texture_band_lo / typical_distance,
                                            p.texture_band_hi / typical_distance));
    scene.planes.push_back({normal, offset, static_cast<int>(scene.textures.size()) - 1});
  };
  add(Vec3::UnitY(), p.camera_height, 4.0 * p.camera_height);
  add(Vec3::UnitZ(), p.far_wall, p.far_wall);
  if (p.n_walls >= 2) add(Vec3::UnitX(), -p.side_wall, 2.0 * p.side_wall);
  if (p.n_walls >= 3) add(Vec3::UnitX(), p.side_wall, 2.0 * p.side_wall);
  return scene;
}

void TrajectoryParams::validate() const {
  if (n_frames < 2) throw std::invalid_argument("trajectory.n_frames must be at least 2");
  if (!(forward_velocity >= 0.0)) throw std::invalid_argument("trajectory.forward_velocity must be >= 0");
  if (!(jitter_std >= 0.0)) throw std::invalid_argument("trajectory.jitter_std must be >= 0");
  if (forward_velocity == 0.0 && jitter_std == 0.0) {
    throw std::invalid_argument("trajectory: consecutive poses must differ (velocity and jitter both 0)");
  }
}

TrajectorySpec make_trajectory(const TrajectoryParams& p, std::uint64_t seed) {
  p.validate();
  TrajectorySpec traj;
  traj.params = p;
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, 1.0);

  Vec3 position = Vec3::Zero();
  double yaw = 0.0;
  traj.camera_to_world.push_back(RigidPose::identity());
  for (int i = 1; i < p.n_frames; ++i) {
    yaw += p.yaw_rate;
    position += p.forward_velocity * Vec3(std::sin(yaw), 0.0, std::cos(yaw));
    RigidPose pose;
    const Vec3 wobble(noise(rng), noise(rng), noise(rng));
    const Vec3 shake(noise(rng), noise(rng), noise(rng));
    pose.rotation = rotation_y(yaw) * rotation_exp(p.jitter_std * wobble);
    pose.translation = position + p.jitter_std * shake;
    traj.camera_to_world.push_back(pose);
  }
  return traj;
}

void RenderedSequence::validate() const {
  const size_t n = frames.size();
  if (gt_depths.size() != n || gt_poses.size() != n) {
    throw DataError("sequence: frames, depths and poses differ in count");
  }
  for (size_t i = 0; i < n; ++i) {
    if (frames[i].height != frames[0].height || frames[i].width != frames[0].width ||
        frames[i].channels != frames[0].channels) {
      throw DataError("sequence: frame " + std::to_string(i) + " has different dimensions");
    }
    if (!gt_depths[i].same_shape(frames[0].height, frames[0].width)) {
      throw DataError("sequence: depth " + std::to_string(i) + " does not match frame size");
    }
  }
}

Intrinsics default_intrinsics(int height, int width) {
  const double f = 0.85 * width;
  return {f, f, 0.5 * (width - 1), 0.5 * (height - 1)};
}

void plane_basis(const Vec3& normal, Vec3& e1, Vec3& e2) {
  int k = 0;
  normal.cwiseAbs().minCoeff(&k);
  e1 = normal.cross(Vec3::Unit(k)).normalized();
  e2 = normal.cross(e1);
}

double texture_value(const Texture& texture, int channel, double s, double t) {
  double value = 0.5;
  for (const auto& c : texture.channels[channel]) {
    value += c.amplitude * std::sin(kTwoPi * (c.freq_x * s + c.freq_y * t) + c.phase);
  }
  return value;
}

RenderedSequence render_sequence(const SceneSpec& scene, const TrajectorySpec& traj,
                                 const Intrinsics& k, const RenderOptions& opts) {
  k.validate();
  if (opts.height < kMinImageSide || opts.width < kMinImageSide) {
    throw std::invalid_argument("render: image must be at least 8x8");
  }
  const int h = opts.height;
  const int w = opts.width;
  const int channels = scene.textures.empty() ? 3 : static_cast<int>(scene.textures[0].channels.size());

  std::vector<Vec3> e1(scene.planes.size()), e2(scene.planes.size());
  for (size_t p = 0; p < scene.planes.size(); ++p) plane_basis(scene.planes[p].normal, e1[p], e2[p]);

  RenderedSequence seq;
  seq.k = k;
  seq.gt_poses = traj.camera_to_world;
  for (size_t f = 0; f < traj.camera_to_world.size(); ++f) {
    const RigidPose& cam = traj.camera_to_world[f];
    ImageGrid image(h, w, channels, 0.0);
    DepthMap depth(h, w, 0.0);
    // Row index of the first uncovered pixel per row, −1 if the row is covered.
    std::vector<int> miss(h, -1);

#pragma omp parallel for schedule(static)
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        const Vec3 dir = cam.rotation * Vec3((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
        double best = std::numeric_limits<double>::infinity();
        int hit = -1;
        for (size_t p = 0; p < scene.planes.size(); ++p) {
          const Plane& plane = scene.planes[p];
          const double denom = plane.normal.dot(dir);
          if (std::abs(denom) < 1e-12) continue;
          const double lambda = (plane.offset - plane.normal.dot(cam.translation)) / denom;
          if (lambda > 0.0 && lambda < best) {
            best = lambda;
            hit = static_cast<int>(p);
          }
        }
        if (hit < 0 || best > opts.d_max) {
          if (miss[v] < 0) miss[v] = u;
          continue;
        }
        // dir has unit z in the camera frame, so lambda is the z-depth.
        depth(v, u) = best;
        const Vec3 x = cam.translation + best * dir;
        const Texture& tex = scene.textures[scene.planes[hit].texture];
        const double s = x.dot(e1[hit]);
        const double t = x.dot(e2[hit]);
        for (int c = 0; c < channels; ++c) image.at(c, v, u) = texture_value(tex, c, s, t);
      }
    }
    for (int v = 0; v < h; ++v) {
      if (miss[v] >= 0) {
        throw DataError("scene does not cover frame " + std::to_string(f) + " pixel (u=" +
                        std::to_string(miss[v]) + ", v=" + std::to_string(v) +
                        "): no plane hit within d_max");
      }
    }
    seq.frames.push_back(std::move(image));
    seq.gt_depths.push_back(std::move(depth));
  }
  return seq;
}

RigidPose relative_pose(const std::vector<RigidPose>& world_poses, int i, int j) {
  const int n = static_cast<int>(world_poses.size());
  if (i < 0 || j < 0 || i >= n || j >= n) {
    throw std::out_of_range("relative_pose: frame index out of range");
  }
  return compose(inverse(world_poses[j]), world_poses[i]);
}

ParamSetA perturb_initialization(const RenderedSequence& seq, const std::vector<FramePair>& pairs,
                                 double pose_noise_std, double scale_noise_std,
                                 std::uint64_t seed) {
  if (pose_noise_std < 0.0 || scale_noise_std < 0.0) {
    throw std::invalid_argument("perturb_initialization: noise std must be >= 0");
  }
  std::mt19937_64 rng(seed ^ 0x5851f42d4c957f2dULL);
  std::normal_distribution<double> noise(0.0, 1.0);
  ParamSetA params;
  params.pairs = pairs;
  params.log_scales.resize(seq.size());
  for (auto& s : params.log_scales) s = scale_noise_std * noise(rng);
  for (const auto& pr : pairs) {
    Twist xi = log_map(relative_pose(seq.gt_poses, pr.from, pr.to));
    for (int c = 0; c < 6; ++c) xi[c] += pose_noise_std * noise(rng);
    params.twists.push_back(xi);
  }
  return params;
}

}  // namespace poseconsist
