#pragma once

#include <cstdint>
#include <vector>

#include "poseconsist/image.h"
#include "poseconsist/lie.h"
#include "poseconsist/params.h"

namespace poseconsist {

struct SinusoidComponent {
  double amplitude = 0.0;
  double freq_x = 0.0;  // cycles per meter along the plane's first tangent
  double freq_y = 0.0;
  double phase = 0.0;
};

// Per-channel sum of sinusoids around 0.5, evaluated in plane coordinates.
struct Texture {
  std::vector<std::vector<SinusoidComponent>> channels;
};

// The set of points X with normal·X = offset (world frame).
struct Plane {
  Vec3 normal = Vec3::UnitZ();
  double offset = 0.0;
  int texture = 0;
};

struct SceneSpec {
  std::vector<Plane> planes;
  std::vector<Texture> textures;
  std::uint64_t rng_seed = 0;
};

struct SceneParams {
  double camera_height = 1.5;   // ground plane below the first camera, meters
  double far_wall = 30.0;       // z of the wall facing the first camera
  double side_wall = 4.0;       // |x| of the side walls
  int n_walls = 3;              // 1 = far wall, 2 adds left, 3 adds right
  int texture_components = 8;   // sinusoids per channel, 6..12
  int channels = 3;
  // Texture frequencies are drawn from [lo, hi] / (typical viewing distance).
  double texture_band_lo = 0.5;
  double texture_band_hi = 2.0;

  void validate() const;
};

SceneSpec make_scene(const SceneParams& params, std::uint64_t seed);

struct TrajectoryParams {
  int n_frames = 30;
  double forward_velocity = 0.5;  // meters per frame along the heading
  double yaw_rate = 0.01;         // radians per frame
  double jitter_std = 0.002;      // rotation (rad) and translation (m) noise per frame

  void validate() const;
};

struct TrajectorySpec {
  TrajectoryParams params;
  std::vector<RigidPose> camera_to_world;
};

TrajectorySpec make_trajectory(const TrajectoryParams& params, std::uint64_t seed);

struct RenderedSequence {
  std::vector<ImageGrid> frames;
  std::vector<DepthMap> gt_depths;
  std::vector<RigidPose> gt_poses;  // camera-to-world
  Intrinsics k;

  int size() const { return static_cast<int>(frames.size()); }
  // Throws DataError unless all lists agree in length and dimensions.
  void validate() const;
};

struct RenderOptions {
  int height = 64;
  int width = 96;
  double d_max = kDefaultMaxDepth;
};

// Intrinsics used by the default configuration for an H×W image.
Intrinsics default_intrinsics(int height, int width);

// Ray-casts every pixel center against the scene. Depth is the z coordinate of
// the nearest hit in the camera frame. Throws DataError naming the first pixel
// whose ray misses every plane or hits beyond d_max.
RenderedSequence render_sequence(const SceneSpec& scene, const TrajectorySpec& traj,
                                 const Intrinsics& k, const RenderOptions& opts);

double texture_value(const Texture& texture, int channel, double s, double t);
void plane_basis(const Vec3& normal, Vec3& e1, Vec3& e2);

// Motion from camera i to camera j: inverse(world_j) · world_i.
RigidPose relative_pose(const std::vector<RigidPose>& world_poses, int i, int j);

// Twists = log of the ground-truth relative pose plus N(0, pose_noise_std) on
// every component; log-scales ~ N(0, scale_noise_std).
ParamSetA perturb_initialization(const RenderedSequence& seq, const std::vector<FramePair>& pairs,
                                 double pose_noise_std, double scale_noise_std,
                                 std::uint64_t seed);

}  // namespace poseconsist
