// Times the OpenMP kernels against the serial references and reports the
// largest output difference. Usage: bench_kernels [reps] [threads]
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>

#include "poseconsist/kernels.h"
#include "poseconsist/optimization.h"
#include "poseconsist/synthetic_world.h"

using namespace poseconsist;

namespace {

double seconds_per_call(int reps, const std::function<void()>& f) {
  f();  // warm-up
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

void row(const char* name, int h, int w, double serial, double parallel, double diff) {
  std::printf("%-22s %4dx%-4d %10.1f %10.1f %7.2fx %10.2e\n", name, h, w, serial * 1e6, parallel * 1e6,
              serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const int reps = argc > 1 ? std::atoi(argv[1]) : 200;
  if (argc > 2) omp_set_num_threads(std::atoi(argv[2]));
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-22s %9s %10s %10s %8s %10s\n", "kernel", "size", "serial_us", "omp_us", "speedup", "max_diff");

  for (auto [h, w] : {std::pair{64, 96}, std::pair{128, 192}, std::pair{256, 384}}) {
    TrajectoryParams tp;
    tp.n_frames = 2;
    RenderOptions ro;
    ro.height = h;
    ro.width = w;
    const Intrinsics k = default_intrinsics(h, w);
    const RenderedSequence seq = render_sequence(make_scene(SceneParams{}, 1), make_trajectory(tp, 1), k, ro);
    const RigidPose pose = relative_pose(seq.gt_poses, 0, 1);
    const PhotometricConfig cfg;

    PixelCoords c_s, c_p;
    ValidityMask v_s, v_p;
    const double r_s = seconds_per_call(reps, [&] { kernels::serial::reproject(seq.gt_depths[0], pose, k, c_s, v_s); });
    const double r_p = seconds_per_call(reps, [&] { kernels::reproject(seq.gt_depths[0], pose, k, c_p, v_p); });
    row("reproject", h, w, r_s, r_p, std::max(max_diff(c_s.u.data, c_p.u.data), max_diff(c_s.v.data, c_p.v.data)));

    ImageGrid s_s, s_p;
    ValidityMask o_s, o_p;
    const double b_s = seconds_per_call(reps, [&] { kernels::serial::sample_bilinear(seq.frames[1], c_p, v_p, s_s, o_s); });
    const double b_p = seconds_per_call(reps, [&] { kernels::sample_bilinear(seq.frames[1], c_p, v_p, s_p, o_p); });
    row("sample_bilinear", h, w, b_s, b_p, max_diff(s_s.data, s_p.data));

    ScalarMap e_s, e_p;
    const WindowMoments m = kernels::window_moments(seq.frames[0]);
    const double p_s = seconds_per_call(reps, [&] { kernels::serial::photometric_error_map(seq.frames[0], s_p, cfg, e_s); });
    const double p_p = seconds_per_call(reps, [&] { kernels::photometric_error_map(seq.frames[0], m, s_p, cfg, e_p); });
    row("photometric_error_map", h, w, p_s, p_p, max_diff(e_s.data, e_p.data));
  }

  // Whole-gradient timing on the default sequence: the per-term loop is where
  // the threads pay off.
  const RenderOptions ro;
  const RenderedSequence seq = render_sequence(make_scene(SceneParams{}, 0), make_trajectory(TrajectoryParams{}, 0),
                                               default_intrinsics(ro.height, ro.width), ro);
  ObjectiveConfig ocfg;
  ocfg.use_cyc = true;
  const ParamSetA p = ground_truth_params(seq, true);
  const int max_threads = omp_get_max_threads();
  omp_set_num_threads(1);
  const double g1 = seconds_per_call(1, [&] { fd_gradient(p, seq, ocfg); });
  omp_set_num_threads(max_threads);
  const double gn = seconds_per_call(1, [&] { fd_gradient(p, seq, ocfg); });
  std::printf("fd_gradient (30 frames, 64x96): 1 thread %.3f s, %d threads %.3f s (%.2fx)\n", g1, max_threads, gn,
              g1 / gn);
  return 0;
}
