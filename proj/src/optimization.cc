#include "poseconsist/optimization.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poseconsist/evaluation.h"

namespace poseconsist {

std::vector<double> frame_feature(const ImageGrid& frame) {
  const ScalarMap gray = frame.grayscale();
  std::vector<double> f;
  f.reserve(kFeatureHeight * kFeatureWidth);
  const double sy = static_cast<double>(frame.height) / kFeatureHeight;
  const double sx = static_cast<double>(frame.width) / kFeatureWidth;
  for (int i = 0; i < kFeatureHeight; ++i) {
    const double y = std::clamp((i + 0.5) * sy - 0.5, 0.0, frame.height - 1.0);
    const int y0 = std::min(static_cast<int>(y), frame.height - 2);
    const double b = y - y0;
    for (int j = 0; j < kFeatureWidth; ++j) {
      const double x = std::clamp((j + 0.5) * sx - 0.5, 0.0, frame.width - 1.0);
      const int x0 = std::min(static_cast<int>(x), frame.width - 2);
      const double a = x - x0;
      f.push_back((1 - b) * ((1 - a) * gray(y0, x0) + a * gray(y0, x0 + 1)) +
                  b * ((1 - a) * gray(y0 + 1, x0) + a * gray(y0 + 1, x0 + 1)));
    }
  }
  double mean = 0.0;
  for (double x : f) mean += x;
  mean /= static_cast<double>(f.size());
  for (double& x : f) x -= mean;
  return f;
}

std::vector<double> pair_feature(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> f(a);
  f.insert(f.end(), b.begin(), b.end());
  return f;
}

Twist PoseRegressor::predict(const std::vector<double>& feature) const {
  if (static_cast<int>(feature.size()) != feature_dim) {
    throw std::invalid_argument("PoseRegressor: feature dimension mismatch");
  }
  Twist xi;
  for (int k = 0; k < 6; ++k) {
    const double* row = weights.data() + static_cast<size_t>(k) * feature_dim;
    double acc = bias[k];
    for (int j = 0; j < feature_dim; ++j) acc += row[j] * feature[j];
    xi[k] = acc;
  }
  return xi;
}

std::vector<double> ParamSetB::flatten() const {
  std::vector<double> x(regressor.weights);
  x.insert(x.end(), regressor.bias.begin(), regressor.bias.end());
  return x;
}

void ParamSetB::unflatten(const std::vector<double>& x) {
  if (x.size() != n_scalars()) throw std::invalid_argument("ParamSetB: flat vector size mismatch");
  std::copy(x.begin(), x.end() - 6, regressor.weights.begin());
  std::copy(x.end() - 6, x.end(), regressor.bias.begin());
}

ParamSetA ground_truth_params(const RenderedSequence& seq, bool skip_pairs) {
  ParamSetA p;
  p.log_scales.assign(seq.size(), 0.0);
  p.pairs = make_pairs(seq.size(), skip_pairs);
  for (const auto& pr : p.pairs) p.twists.push_back(log_map(relative_pose(seq.gt_poses, pr.from, pr.to)));
  return p;
}

namespace {

void check_pairs(const ParamSetA& params, const Objective& objective) {
  if (params.pairs != objective.pairs()) {
    throw std::invalid_argument("ParamSetA: pair list does not match the objective configuration");
  }
}

std::vector<double> flatten_gradient(const ObjectiveGradient& g) {
  std::vector<double> x(g.log_scales);
  for (const auto& t : g.pair_twists) x.insert(x.end(), t.begin(), t.end());
  return x;
}

}  // namespace

double log_scale_cov(const std::vector<double>& log_scales) {
  std::vector<double> scales;
  for (double s : log_scales) scales.push_back(std::exp(-s));
  return ScaleSeries::from_scales(std::move(scales)).cov;
}

LossBreakdown total_objective(const ParamSetA& params, const RenderedSequence& seq,
                              const ObjectiveConfig& cfg) {
  const Objective objective(seq, cfg);
  check_pairs(params, objective);
  return objective.evaluate(params.log_scales, params.twists, {});
}

std::vector<double> fd_gradient(const ParamSetA& params, const RenderedSequence& seq,
                                const ObjectiveConfig& cfg) {
  const Objective objective(seq, cfg);
  check_pairs(params, objective);
  return flatten_gradient(objective.gradient(params.log_scales, params.twists, {}, true));
}

RegressorProblem::RegressorProblem(const RenderedSequence& seq, const ObjectiveConfig& cfg)
    : objective_(seq, cfg) {
  std::vector<std::vector<double>> frames;
  for (const auto& f : seq.frames) frames.push_back(frame_feature(f));
  for (const auto& p : objective_.pairs()) pair_features_.push_back(pair_feature(frames[p.from], frames[p.to]));
  for (const auto& f : frames) self_features_.push_back(pair_feature(f, f));
}

std::vector<Twist> RegressorProblem::pair_twists(const PoseRegressor& r) const {
  std::vector<Twist> out;
  for (const auto& f : pair_features_) out.push_back(r.predict(f));
  return out;
}

std::vector<Twist> RegressorProblem::self_twists(const PoseRegressor& r) const {
  std::vector<Twist> out;
  for (const auto& f : self_features_) out.push_back(r.predict(f));
  return out;
}

LossBreakdown RegressorProblem::evaluate(const ParamSetB& p) const {
  const std::vector<double> zero(objective_.n_frames(), 0.0);
  return objective_.evaluate(zero, pair_twists(p.regressor), self_twists(p.regressor));
}

std::vector<double> RegressorProblem::gradient(const ParamSetB& p, LossBreakdown* value) const {
  const std::vector<double> zero(objective_.n_frames(), 0.0);
  const ObjectiveGradient g =
      objective_.gradient(zero, pair_twists(p.regressor), self_twists(p.regressor), false);
  if (value) *value = g.value;

  const int dim = p.regressor.feature_dim;
  std::vector<double> flat(p.n_scalars(), 0.0);
  auto chain = [&](const TwistGradient& dxi, const std::vector<double>& f) {
    for (int k = 0; k < 6; ++k) {
      if (dxi[k] == 0.0) continue;
      double* row = flat.data() + static_cast<size_t>(k) * dim;
      for (int j = 0; j < dim; ++j) row[j] += dxi[k] * f[j];
      flat[flat.size() - 6 + k] += dxi[k];
    }
  };
  for (size_t i = 0; i < pair_features_.size(); ++i) chain(g.pair_twists[i], pair_features_[i]);
  for (size_t i = 0; i < self_features_.size(); ++i) chain(g.self_twists[i], self_features_[i]);
  return flat;
}

double RegressorProblem::mean_self_motion(const PoseRegressor& r) const {
  double sum = 0.0;
  const auto twists = self_twists(r);
  for (const auto& xi : twists) sum += xi.axis_angle.cwiseAbs().sum() + xi.translation.cwiseAbs().sum();
  return sum / static_cast<double>(twists.size());
}

LossBreakdown total_objective(const ParamSetB& params, const RenderedSequence& seq,
                              const ObjectiveConfig& cfg) {
  return RegressorProblem(seq, cfg).evaluate(params);
}

std::vector<double> fd_gradient(const ParamSetB& params, const RenderedSequence& seq,
                                const ObjectiveConfig& cfg) {
  return RegressorProblem(seq, cfg).gradient(params, nullptr);
}

OptimizeResult adam_minimize(std::vector<double> x,
                             const std::function<FlatEvaluation(const std::vector<double>&)>& evaluate,
                             const AdamConfig& adam, int iterations, double divergence_threshold) {
  OptimizeResult result;
  std::vector<double> m(x.size(), 0.0), v(x.size(), 0.0);
  double beta1_pow = 1.0, beta2_pow = 1.0;
  for (int it = 0;; ++it) {
    const FlatEvaluation e = evaluate(x);
    result.trace.push_back({it, e.loss, e.cov_scales});
    if (!std::isfinite(e.loss.total) || e.loss.total > divergence_threshold) {
      result.diverged = true;
      break;
    }
    if (it == iterations) break;
    beta1_pow *= adam.beta1;
    beta2_pow *= adam.beta2;
    for (size_t i = 0; i < x.size(); ++i) {
      const double g = e.gradient[i];
      m[i] = adam.beta1 * m[i] + (1.0 - adam.beta1) * g;
      v[i] = adam.beta2 * v[i] + (1.0 - adam.beta2) * g * g;
      const double m_hat = m[i] / (1.0 - beta1_pow);
      const double v_hat = v[i] / (1.0 - beta2_pow);
      x[i] -= adam.learning_rate * m_hat / (std::sqrt(v_hat) + adam.epsilon);
    }
  }
  result.final_params = std::move(x);
  return result;
}

OptimizedA optimize(const ParamSetA& init, const RenderedSequence& seq, const ObjectiveConfig& cfg) {
  if (cfg.regime != Regime::kDirect) throw std::invalid_argument("optimize: ParamSetA needs the direct regime");
  const Objective objective(seq, cfg);
  check_pairs(init, objective);
  ParamSetA work = init;
  auto evaluate = [&](const std::vector<double>& x) {
    work.unflatten(x);
    const ObjectiveGradient g = objective.gradient(work.log_scales, work.twists, {}, true);
    return FlatEvaluation{g.value, flatten_gradient(g), log_scale_cov(work.log_scales)};
  };
  OptimizedA out;
  out.result = adam_minimize(init.flatten(), evaluate, cfg.adam, cfg.iterations, cfg.divergence_threshold);
  out.params = init;
  out.params.unflatten(out.result.final_params);
  return out;
}

OptimizedB optimize(const ParamSetB& init, const RenderedSequence& seq, const ObjectiveConfig& cfg) {
  if (cfg.regime != Regime::kRegressor) {
    throw std::invalid_argument("optimize: ParamSetB needs the regressor regime");
  }
  const RegressorProblem problem(seq, cfg);
  ParamSetB work = init;
  auto evaluate = [&](const std::vector<double>& x) {
    work.unflatten(x);
    FlatEvaluation e;
    e.gradient = problem.gradient(work, &e.loss);
    return e;
  };
  OptimizedB out;
  out.result = adam_minimize(init.flatten(), evaluate, cfg.adam, cfg.iterations, cfg.divergence_threshold);
  out.params = init;
  out.params.unflatten(out.result.final_params);
  return out;
}

}  // namespace poseconsist
