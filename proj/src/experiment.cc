#include "poseconsist/experiment.h"

#include <cmath>
#include <stdexcept>

namespace poseconsist {

RenderedSequence make_sequence(const ExperimentConfig& cfg, std::uint64_t seed) {
  const Intrinsics k = default_intrinsics(cfg.render.height, cfg.render.width);
  return render_sequence(make_scene(cfg.scene, seed), make_trajectory(cfg.trajectory, seed), k,
                         cfg.render);
}

ParamSetA initial_params_a(const RenderedSequence& seq, const ExperimentConfig& cfg,
                           std::uint64_t seed) {
  return perturb_initialization(seq, make_pairs(seq.size(), cfg.objective.skip_pairs),
                                cfg.noise.pose_std, cfg.noise.scale_std, seed);
}

std::vector<RigidPose> chain_poses(const std::vector<RigidPose>& relative) {
  std::vector<RigidPose> world{RigidPose::identity()};
  // world_{t+1} = world_t · (t → t+1)⁻¹
  for (const auto& r : relative) world.push_back(compose(world.back(), inverse(r)));
  return world;
}

std::vector<RigidPose> adjacent_relative(const std::vector<RigidPose>& world) {
  std::vector<RigidPose> out;
  for (int t = 0; t + 1 < static_cast<int>(world.size()); ++t) out.push_back(relative_pose(world, t, t + 1));
  return out;
}

PredictionMetrics evaluate_prediction(const RenderedSequence& seq, const Prediction& pred,
                                      const EvaluationParams& eval) {
  PredictionMetrics m;
  std::vector<ValidityMask> valid;
  for (const auto& d : seq.gt_depths) valid.push_back(gt_validity(d));
  m.scales = scale_series(seq.gt_depths, pred.depths, valid, eval.depth);
  for (size_t i = 0; i < kAllScalings.size(); ++i) {
    m.depth[i] = eigen_metrics(seq.gt_depths, pred.depths, valid, kAllScalings[i], eval.depth);
  }
  m.ate = snippet_ate(pred.relative, adjacent_relative(seq.gt_poses), seq.size(), eval.snippet);
  return m;
}

VariantOutcome run_variant(const RenderedSequence& seq, const ExperimentConfig& cfg,
                           const Variant& variant, std::uint64_t seed) {
  const ObjectiveConfig ocfg = cfg.variant_objective(variant);
  VariantOutcome out;
  out.variant = variant;
  const int n = seq.size();

  if (ocfg.regime == Regime::kDirect) {
    OptimizedA opt = optimize(initial_params_a(seq, cfg, seed), seq, ocfg);
    out.result = std::move(opt.result);
    out.params_a = std::move(opt.params);
    for (int t = 0; t < n; ++t) {
      DepthMap d = seq.gt_depths[t];
      const double s = std::exp(out.params_a.log_scales[t]);
      for (auto& x : d.data) x *= s;
      out.prediction.depths.push_back(std::move(d));
    }
    for (int t = 0; t + 1 < n; ++t) {
      out.prediction.relative.push_back(exp_map(out.params_a.twists[find_pair(out.params_a.pairs, t, t + 1)]));
    }
  } else {
    OptimizedB opt = optimize(ParamSetB{}, seq, ocfg);
    out.result = std::move(opt.result);
    out.params_b = std::move(opt.params);
    const RegressorProblem problem(seq, ocfg);
    const auto twists = problem.pair_twists(out.params_b.regressor);
    const auto& pairs = problem.objective().pairs();
    out.prediction.depths = seq.gt_depths;
    for (int t = 0; t + 1 < n; ++t) out.prediction.relative.push_back(exp_map(twists[find_pair(pairs, t, t + 1)]));
    out.self_motion = problem.mean_self_motion(out.params_b.regressor);
  }
  out.metrics = evaluate_prediction(seq, out.prediction, cfg.evaluation);
  return out;
}

SeedOutcome run_seed(const RenderedSequence& seq, const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedOutcome s;
  s.seed = seed;
  for (const auto& v : cfg.variants) s.variants.push_back(run_variant(seq, cfg, v, seed));
  return s;
}

std::vector<VariantSummary> summarize(const std::vector<SeedOutcome>& seeds) {
  std::vector<VariantSummary> out;
  if (seeds.empty()) return out;
  const size_t nv = seeds.front().variants.size();
  for (size_t v = 0; v < nv; ++v) {
    std::vector<double> cov, ate, self;
    for (const auto& s : seeds) {
      if (s.variants.size() != nv) throw std::invalid_argument("summarize: seeds ran different variants");
      cov.push_back(s.variants[v].metrics.scales.cov);
      ate.push_back(s.variants[v].metrics.ate.mean);
      self.push_back(s.variants[v].self_motion);
    }
    out.push_back({seeds.front().variants[v].variant.name, median(cov), median(ate), median(self), 0.0});
  }
  for (const auto& base : out) {
    if (base.name != "baseline" || !(base.median_cov > 0.0)) continue;
    for (auto& s : out) s.cov_reduction = 1.0 - s.median_cov / base.median_cov;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.seeds.empty()) throw std::invalid_argument("run_experiment: no seeds");
  ExperimentResult r;
  for (auto seed : cfg.seeds) r.seeds.push_back(run_seed(make_sequence(cfg, seed), cfg, seed));
  r.summary = summarize(r.seeds);
  return r;
}

}  // namespace poseconsist
