#include <doctest.h>

#include <cmath>
#include <string>

#include "poseconsist/errors.h"
#include "poseconsist/evaluation.h"
#include "poseconsist/params.h"
#include "poseconsist/synthetic_world.h"
#include "poseconsist/view_synthesis.h"

using namespace poseconsist;

namespace {

SceneSpec single_wall(double z) {
  SceneSpec s;
  s.textures.push_back(Texture{{{{0.2, 1.0, 0.5, 0.0}}}});
  s.planes.push_back({Vec3::UnitZ(), z, 0});
  return s;
}

TrajectorySpec fixed(std::vector<RigidPose> poses) {
  TrajectorySpec t;
  t.params.n_frames = static_cast<int>(poses.size());
  t.camera_to_world = std::move(poses);
  return t;
}

RenderedSequence default_sequence(std::uint64_t seed, int frames = 30) {
  TrajectoryParams tp;
  tp.n_frames = frames;
  const RenderOptions ro;
  return render_sequence(make_scene(SceneParams{}, seed), make_trajectory(tp, seed),
                         default_intrinsics(ro.height, ro.width), ro);
}

bool near(const RigidPose& a, const RigidPose& b, double tol) {
  return (a.rotation - b.rotation).cwiseAbs().maxCoeff() < tol &&
         (a.translation - b.translation).cwiseAbs().maxCoeff() < tol;
}

}  // namespace

TEST_CASE("fronto-parallel wall gives constant depth") {
  RenderOptions ro;
  ro.height = 12;
  ro.width = 16;
  RigidPose moved;
  moved.translation = Vec3(0, 0, 2.5);
  const RenderedSequence seq =
      render_sequence(single_wall(7.0), fixed({RigidPose::identity(), moved}), default_intrinsics(12, 16), ro);
  for (double d : seq.gt_depths[0].data) CHECK(std::abs(d - 7.0) < 1e-12);
  for (double d : seq.gt_depths[1].data) CHECK(std::abs(d - 4.5) < 1e-12);
  for (double x : seq.frames[0].data) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }
}

TEST_CASE("uncovered pixels are reported by position") {
  RenderOptions ro;
  ro.height = 10;
  ro.width = 10;
  try {
    render_sequence(single_wall(-5.0), fixed({RigidPose::identity()}), default_intrinsics(10, 10), ro);
    FAIL("expected a coverage error");
  } catch (const DataError& e) {
    const std::string what = e.what();
    CHECK(what.find("frame 0") != std::string::npos);
    CHECK(what.find("u=0, v=0") != std::string::npos);
  }
  // A wall beyond d_max is uncovered too.
  ro.d_max = 6.0;
  CHECK_THROWS_AS(render_sequence(single_wall(7.0), fixed({RigidPose::identity()}), default_intrinsics(10, 10), ro),
                  DataError);
}

TEST_CASE("default sequence is valid and deterministic") {
  const RenderedSequence a = default_sequence(3, 6);
  const RenderedSequence b = default_sequence(3, 6);
  CHECK(a.size() == 6);
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.frames[i] == b.frames[i]);
    CHECK(a.gt_depths[i] == b.gt_depths[i]);
    CHECK_NOTHROW(validate_image(a.frames[i]));
    CHECK_NOTHROW(validate_depth(a.gt_depths[i]));
    CHECK(a.gt_poses[i].matrix() == b.gt_poses[i].matrix());
  }
  const RenderedSequence c = default_sequence(4, 6);
  CHECK_FALSE(a.frames[1] == c.frames[1]);
}

TEST_CASE("consecutive poses differ") {
  const TrajectorySpec t = make_trajectory(TrajectoryParams{}, 1);
  for (size_t i = 1; i < t.camera_to_world.size(); ++i) {
    CHECK((t.camera_to_world[i].translation - t.camera_to_world[i - 1].translation).norm() > 0.1);
  }
}

TEST_CASE("relative pose group laws") {
  const TrajectorySpec t = make_trajectory(TrajectoryParams{}, 2);
  const auto& w = t.camera_to_world;
  for (int i = 0; i + 2 < static_cast<int>(w.size()); ++i) {
    CHECK(near(relative_pose(w, i, i), RigidPose::identity(), 1e-12));
    CHECK(near(relative_pose(w, i, i + 1), inverse(relative_pose(w, i + 1, i)), 1e-9));
    CHECK(near(relative_pose(w, i, i + 2), compose(relative_pose(w, i + 1, i + 2), relative_pose(w, i, i + 1)), 1e-9));
  }
  CHECK_THROWS(relative_pose(w, 0, static_cast<int>(w.size())));
}

TEST_CASE("ground-truth warps reconstruct adjacent frames") {
  for (std::uint64_t seed : {0u, 1u, 2u}) {
    const RenderedSequence seq = default_sequence(seed, 8);
    for (int t = 0; t + 1 < seq.size(); ++t) {
      for (auto [tgt, src] : {std::pair{t, t + 1}, std::pair{t + 1, t}}) {
        const SampledImage s = synthesize_view(seq.frames[src], seq.gt_depths[tgt],
                                               relative_pose(seq.gt_poses, tgt, src), seq.k);
        double err = 0.0;
        size_t n = 0;
        for (int c = 0; c < s.image.channels; ++c) {
          for (size_t i = 0; i < s.valid.size(); ++i) {
            if (!s.valid.data[i]) continue;
            err += std::abs(s.image.data[c * s.image.plane_size() + i] - seq.frames[tgt].data[c * s.image.plane_size() + i]);
            ++n;
          }
        }
        REQUIRE(n > 0);
        CHECK(err / n < 0.01);
      }
    }
  }
}

TEST_CASE("perturbation is exact at zero noise, calibrated and deterministic") {
  const RenderedSequence seq = default_sequence(5);
  const auto pairs = make_pairs(seq.size(), true);
  const ParamSetA exact = perturb_initialization(seq, pairs, 0.0, 0.0, 9);
  for (double s : exact.log_scales) CHECK(s == 0.0);
  for (size_t i = 0; i < pairs.size(); ++i) {
    const Twist gt = log_map(relative_pose(seq.gt_poses, pairs[i].from, pairs[i].to));
    for (int k = 0; k < 6; ++k) CHECK(exact.twists[i][k] == gt[k]);
  }

  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ParamSetA p = perturb_initialization(seq, pairs, 0.01, 0.1, seed);
    std::vector<double> scales;
    for (double s : p.log_scales) scales.push_back(std::exp(-s));
    const double cov = ScaleSeries::from_scales(scales).cov;
    CHECK(cov > 0.05);
    CHECK(cov < 0.15);
    const ParamSetA q = perturb_initialization(seq, pairs, 0.01, 0.1, seed);
    CHECK(p.log_scales == q.log_scales);
    CHECK(p.flatten() == q.flatten());
  }
  CHECK_THROWS(perturb_initialization(seq, pairs, -1.0, 0.1, 0));
}
