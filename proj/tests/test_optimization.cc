#include <doctest.h>
#include <omp.h>

#include <cmath>
#include <random>

#include "poseconsist/experiment.h"
#include "poseconsist/optimization.h"
#include "poseconsist/synthetic_world.h"

using namespace poseconsist;

namespace {

ExperimentConfig small_config(int frames = 5) {
  ExperimentConfig cfg;
  cfg.render.height = 24;
  cfg.render.width = 32;
  cfg.trajectory.n_frames = frames;
  return cfg;
}

const RenderedSequence& small_sequence() {
  static const RenderedSequence seq = make_sequence(small_config(), 11);
  return seq;
}

const RenderedSequence& default_sequence() {
  static const RenderedSequence seq = make_sequence(ExperimentConfig{}, 2);
  return seq;
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double diff_norm(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

ObjectiveConfig with_constraints(bool fb, bool cyc, double lambda) {
  ObjectiveConfig c;
  c.use_fb = fb;
  c.use_cyc = cyc;
  c.lambda = lambda;
  return c;
}

}  // namespace

TEST_CASE("ground truth parameters are a near fixed point") {
  const auto& seq = default_sequence();
  const ParamSetA gt = ground_truth_params(seq, true);
  const LossBreakdown b = total_objective(gt, seq, with_constraints(true, true, 0.1));
  CHECK(b.photometric < 0.01);
  CHECK(b.fb < 1e-12);
  CHECK(b.cyc < 1e-12);
  CHECK(b.id == 0.0);

  // Perturbation makes every term worse.
  const ParamSetA noisy = perturb_initialization(seq, gt.pairs, 0.01, 0.1, 2);
  const LossBreakdown n = total_objective(noisy, seq, with_constraints(true, true, 0.1));
  CHECK(n.photometric > b.photometric);
  CHECK(n.fb > 1e-4);
  CHECK(n.cyc > 1e-4);
}

TEST_CASE("breakdown adds up and lambda enters linearly") {
  const auto& seq = small_sequence();
  const ParamSetA p = perturb_initialization(seq, make_pairs(seq.size(), true), 0.01, 0.1, 3);

  const LossBreakdown both = total_objective(p, seq, with_constraints(true, true, 0.1));
  CHECK(both.total == doctest::Approx(both.photometric + 1e-3 * both.smoothness + 0.1 * (both.fb + both.cyc)).epsilon(1e-14));

  const double base = total_objective(p, seq, with_constraints(true, false, 0.0)).total;
  CHECK(base == doctest::Approx(both.photometric + 1e-3 * both.smoothness).epsilon(1e-14));
  const double l1 = total_objective(p, seq, with_constraints(true, false, 0.1)).total - base;
  const double l2 = total_objective(p, seq, with_constraints(true, false, 0.2)).total - base;
  CHECK(l2 == doctest::Approx(2.0 * l1).epsilon(1e-10));
  CHECK(l1 == doctest::Approx(0.1 * both.fb).epsilon(1e-10));

  // Disabled constraints are still reported.
  const LossBreakdown none = total_objective(p, seq, with_constraints(false, false, 0.1));
  CHECK(none.fb == both.fb);
  CHECK(none.cyc == both.cyc);
  CHECK(none.total == base);
}

TEST_CASE("gradient at step h agrees with step h/2") {
  // Bilinear sampling and the L1 distances are piecewise smooth; h is kept
  // well below the typical distance to a kink.
  const auto& seq = small_sequence();
  const auto pairs = make_pairs(seq.size(), true);
  ObjectiveConfig c = with_constraints(true, true, 0.1);
  double worst = 0.0;
  for (std::uint64_t point = 0; point < 20; ++point) {
    const ParamSetA p = perturb_initialization(seq, pairs, 0.01, 0.1, 100 + point);
    c.fd_step = 1e-6;
    const auto gh = fd_gradient(p, seq, c);
    c.fd_step = 5e-7;
    const auto gh2 = fd_gradient(p, seq, c);
    REQUIRE(gh.size() == p.n_scalars());
    worst = std::max(worst, diff_norm(gh, gh2) / norm(gh));
  }
  CHECK(worst < 1e-3);
}

TEST_CASE("gradient matches a direct difference of the objective") {
  // Away from mask boundaries the frozen-mask gradient agrees with plain
  // central differences of the full objective along a random direction.
  const auto& seq = small_sequence();
  const auto pairs = make_pairs(seq.size(), true);
  const ObjectiveConfig c = with_constraints(true, true, 0.1);
  const ParamSetA p = perturb_initialization(seq, pairs, 0.01, 0.1, 7);
  const auto g = fd_gradient(p, seq, c);
  std::mt19937_64 rng(8);
  std::normal_distribution<double> gauss;
  std::vector<double> dir(g.size());
  for (auto& x : dir) x = gauss(rng);
  const double scale = 1.0 / norm(dir);
  double predicted = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    dir[i] *= scale;
    predicted += g[i] * dir[i];
  }
  const double h = 1e-6;
  const auto shifted = [&](double s) {
    auto x = p.flatten();
    for (size_t i = 0; i < x.size(); ++i) x[i] += s * dir[i];
    ParamSetA q = p;
    q.unflatten(x);
    return total_objective(q, seq, c).total;
  };
  const double observed = (shifted(h) - shifted(-h)) / (2 * h);
  CHECK(std::abs(observed - predicted) < 0.05 * std::abs(predicted));
}

TEST_CASE("flatten and unflatten are inverse") {
  const auto& seq = small_sequence();
  const ParamSetA p = perturb_initialization(seq, make_pairs(seq.size(), true), 0.01, 0.1, 5);
  ParamSetA q = p;
  auto x = p.flatten();
  CHECK(x.size() == p.n_scalars());
  CHECK(x[0] == p.log_scales[0]);
  CHECK(x[p.log_scales.size() + 3] == p.twists[0].translation(0));
  q.unflatten(x);
  CHECK(q.flatten() == x);

  ParamSetB b;
  b.regressor.weights[17] = 0.5;
  b.regressor.bias[2] = -1.0;
  ParamSetB b2;
  b2.unflatten(b.flatten());
  CHECK(b2.regressor.weights == b.regressor.weights);
  CHECK(b2.regressor.bias == b.regressor.bias);
  CHECK(b.flatten().size() == b.n_scalars());
}

TEST_CASE("regressor chain rule matches full differences on the weights") {
  const auto& seq = small_sequence();
  ObjectiveConfig c;
  c.regime = Regime::kRegressor;
  c.use_id = true;
  c.lambda = 0.1;
  c.skip_pairs = false;
  c.fd_step = 1e-7;
  const RegressorProblem problem(seq, c);
  std::mt19937_64 rng(21);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<size_t> pick(0, 6 * kFeatureDim + 5);
  for (int point = 0; point < 5; ++point) {
    ParamSetB p;
    for (auto& w : p.regressor.weights) w = 2e-4 * gauss(rng);
    for (auto& b : p.regressor.bias) b = 0.01 * gauss(rng);
    p.regressor.bias[5] += 0.5;  // forward motion keeps the warp in view
    const auto chain = problem.gradient(p, nullptr);
    CHECK(chain == fd_gradient(p, seq, c));
    const double scale = norm(chain);
    const auto base = p.flatten();
    for (int probe = 0; probe < 8; ++probe) {
      const size_t i = pick(rng);
      const double h = 1e-7;
      auto x = base;
      x[i] = base[i] + h;
      ParamSetB up;
      up.unflatten(x);
      x[i] = base[i] - h;
      ParamSetB down;
      down.unflatten(x);
      const double full = (problem.evaluate(up).total - problem.evaluate(down).total) / (2 * h);
      CHECK(std::abs(full - chain[i]) <= 1e-4 * scale);
    }
  }
}

TEST_CASE("identity gradient reaches only the self twists") {
  const auto& seq = small_sequence();
  ObjectiveConfig c;
  c.regime = Regime::kRegressor;
  c.use_id = true;
  c.lambda = 0.1;
  const Objective obj(seq, c);
  const ParamSetA p = perturb_initialization(seq, obj.pairs(), 0.01, 0.0, 2);
  std::vector<Twist> self(seq.size());
  for (int f = 0; f < seq.size(); ++f) {
    self[f].axis_angle = Vec3(0.01, -0.02, 0.03 * (f + 1));
    self[f].translation = Vec3(-0.1, 0.2, 0.05);
  }
  const ObjectiveGradient g = obj.gradient(p.log_scales, p.twists, self, false);
  const double w = 0.1 / seq.size();
  for (int f = 0; f < seq.size(); ++f) {
    const double sign[] = {1, -1, 1, -1, 1, 1};
    for (int k = 0; k < 6; ++k) CHECK(g.self_twists[f][k] == doctest::Approx(w * sign[k]).epsilon(1e-8));
  }
  CHECK(g.log_scales.empty());
  CHECK(g.value.id == doctest::Approx(0.03 + 0.09 + 0.35).epsilon(1e-12));
}

TEST_CASE("log scales only receive photometric and smoothness gradient") {
  const auto& seq = small_sequence();
  const auto pairs = make_pairs(seq.size(), true);
  const ParamSetA p = perturb_initialization(seq, pairs, 0.01, 0.1, 9);
  const auto g0 = fd_gradient(p, seq, with_constraints(true, true, 0.0));
  const auto g1 = fd_gradient(p, seq, with_constraints(true, true, 10.0));
  for (int f = 0; f < p.n_frames(); ++f) {
    CHECK(g0[f] == g1[f]);
    CHECK(g0[f] != 0.0);
  }
  bool twist_changed = false;
  for (size_t i = p.log_scales.size(); i < g0.size(); ++i) twist_changed |= g0[i] != g1[i];
  CHECK(twist_changed);
}

TEST_CASE("adam converges on a quadratic") {
  const auto eval = [](const std::vector<double>& x) {
    FlatEvaluation e;
    e.loss.total = (x[0] - 3.0) * (x[0] - 3.0);
    e.gradient = {2.0 * (x[0] - 3.0)};
    return e;
  };
  AdamConfig adam;
  adam.learning_rate = 0.1;
  const OptimizeResult r = adam_minimize({0.0}, eval, adam, 500);
  CHECK(std::abs(r.final_params[0] - 3.0) < 1e-6);
  CHECK(r.trace.size() == 501);
  CHECK(r.trace.front().iteration == 0);
  CHECK(r.trace.back().iteration == 500);
  CHECK(r.trace.front().loss.total == 9.0);
  CHECK_FALSE(r.diverged);

  // First step moves by exactly the learning rate.
  const OptimizeResult one = adam_minimize({0.0}, eval, adam, 1);
  CHECK(std::abs(one.final_params[0] - 0.1) < 1e-9);
}

TEST_CASE("adam flags divergence and stops") {
  const auto eval = [](const std::vector<double>& x) {
    FlatEvaluation e;
    e.loss.total = std::exp(x[0]);
    e.gradient = {-1.0};  // always pushes uphill
    return e;
  };
  AdamConfig adam;
  adam.learning_rate = 1.0;
  const OptimizeResult r = adam_minimize({10.0}, eval, adam, 100, 1e6);
  CHECK(r.diverged);
  CHECK(r.trace.size() < 101);
  CHECK(r.trace.back().loss.total > 1e6);
}

TEST_CASE("scale coefficient of variation") {
  CHECK(log_scale_cov({0.0, 0.0, 0.0}) == 0.0);
  CHECK(std::abs(log_scale_cov({0.0, -std::log(3.0)}) - 0.5) < 1e-15);
  const auto& seq = small_sequence();
  const ParamSetA exact = perturb_initialization(seq, make_pairs(seq.size(), true), 0.0, 0.0, 1);
  CHECK(log_scale_cov(exact.log_scales) < 1e-6);
}

TEST_CASE("optimization is deterministic across runs and thread counts") {
  const auto& seq = small_sequence();
  ObjectiveConfig c = with_constraints(false, true, 0.1);
  c.iterations = 3;
  const ParamSetA init = perturb_initialization(seq, make_pairs(seq.size(), true), 0.01, 0.1, 6);
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const OptimizedA a = optimize(init, seq, c);
  omp_set_num_threads(4);
  const OptimizedA b = optimize(init, seq, c);
  omp_set_num_threads(saved);
  CHECK(a.result.final_params == b.result.final_params);
  REQUIRE(a.result.trace.size() == 4);
  for (size_t i = 0; i < a.result.trace.size(); ++i) {
    CHECK(a.result.trace[i].loss.total == b.result.trace[i].loss.total);
    CHECK(a.result.trace[i].cov_scales == b.result.trace[i].cov_scales);
  }
  CHECK(a.result.trace.back().loss.total < a.result.trace.front().loss.total);
}

TEST_CASE("optimizing from ground truth stays close") {
  const auto& seq = small_sequence();
  ObjectiveConfig c = with_constraints(true, false, 0.1);
  const ParamSetA gt = ground_truth_params(seq, true);
  const auto g = fd_gradient(gt, seq, c);
  const ParamSetA noisy = perturb_initialization(seq, gt.pairs, 0.01, 0.1, 12);
  CHECK(norm(g) < norm(fd_gradient(noisy, seq, c)));
  // Adam's early steps have size ~lr whatever the gradient, and the masked
  // objective is only piecewise smooth, so single steps can go uphill; the run
  // as a whole must not leave the truth's basin.
  c.iterations = 60;
  c.adam.learning_rate = 1e-3;
  const OptimizedA r = optimize(gt, seq, c);
  const auto& trace = r.result.trace;
  CHECK(trace.back().loss.total <= trace.front().loss.total + 1e-6);
  for (size_t i = 10; i < trace.size(); ++i) CHECK(trace[i].loss.total <= trace.front().loss.total + 1e-6);
  for (double ls : r.params.log_scales) CHECK(std::abs(ls) < 0.1);
}

TEST_CASE("forward-backward constraint suppresses its own violation") {
  const auto& seq = small_sequence();
  const ParamSetA init = perturb_initialization(seq, make_pairs(seq.size(), true), 0.01, 0.1, 13);
  ObjectiveConfig off = with_constraints(false, false, 0.0);
  ObjectiveConfig on = with_constraints(true, false, 0.1);
  off.iterations = on.iterations = 60;
  const double fb_off = optimize(init, seq, off).result.trace.back().loss.fb;
  const double fb_on = optimize(init, seq, on).result.trace.back().loss.fb;
  CHECK(fb_on < 0.1 * fb_off);
}

TEST_CASE("noise-free initialization scores zero CoV in a run") {
  ExperimentConfig cfg = small_config();
  cfg.noise.pose_std = 0.0;
  cfg.noise.scale_std = 0.0;
  cfg.objective.iterations = 0;
  const auto& seq = small_sequence();
  const VariantOutcome v = run_variant(seq, cfg, parse_variant("baseline"), 11);
  CHECK(v.metrics.scales.cov < 1e-6);
  CHECK(v.metrics.ate.mean < 1e-9);
  CHECK(v.result.trace.size() == 1);
}
