#pragma once

#include <array>
#include <functional>
#include <vector>

#include "poseconsist/objective.h"
#include "poseconsist/params.h"
#include "poseconsist/synthetic_world.h"

namespace poseconsist {

// Image-pair features for the pose regressor: each frame is converted to
// grayscale, bilinearly resampled to 16×24, mean-subtracted, and the two
// vectors are concatenated.
inline constexpr int kFeatureHeight = 16;
inline constexpr int kFeatureWidth = 24;
inline constexpr int kFeatureDim = 2 * kFeatureHeight * kFeatureWidth;

std::vector<double> frame_feature(const ImageGrid& frame);
std::vector<double> pair_feature(const std::vector<double>& a, const std::vector<double>& b);

// Linear map from a pair feature to a twist: ξ = W f + b.
struct PoseRegressor {
  int feature_dim = kFeatureDim;
  std::vector<double> weights = std::vector<double>(6 * kFeatureDim, 0.0);  // row-major 6×F
  std::array<double, 6> bias{};

  Twist predict(const std::vector<double>& feature) const;
};

struct ParamSetB {
  PoseRegressor regressor;

  size_t n_scalars() const { return regressor.weights.size() + 6; }
  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& x);
};

// Ground-truth parameters for Regime A: zero log-scales, log of the true
// relative poses.
ParamSetA ground_truth_params(const RenderedSequence& seq, bool skip_pairs);

// Flat gradient in ParamSetA::flatten order.
std::vector<double> fd_gradient(const ParamSetA& params, const RenderedSequence& seq,
                                const ObjectiveConfig& cfg);
// Flat gradient in ParamSetB::flatten order. dL/dξ comes from central
// differences per predicted twist and is chained through the linear map:
// dL/dW = Σ (dL/dξ) fᵀ, dL/db = Σ dL/dξ.
std::vector<double> fd_gradient(const ParamSetB& params, const RenderedSequence& seq,
                                const ObjectiveConfig& cfg);

LossBreakdown total_objective(const ParamSetA& params, const RenderedSequence& seq,
                              const ObjectiveConfig& cfg);
LossBreakdown total_objective(const ParamSetB& params, const RenderedSequence& seq,
                              const ObjectiveConfig& cfg);

// Regime B view of a sequence: cached features and the objective.
class RegressorProblem {
 public:
  RegressorProblem(const RenderedSequence& seq, const ObjectiveConfig& cfg);

  const Objective& objective() const { return objective_; }
  std::vector<Twist> pair_twists(const PoseRegressor& r) const;
  std::vector<Twist> self_twists(const PoseRegressor& r) const;
  LossBreakdown evaluate(const ParamSetB& p) const;
  // Returns the flat gradient; `value` receives the breakdown at p.
  std::vector<double> gradient(const ParamSetB& p, LossBreakdown* value) const;
  // Mean ‖regressor(I_t, I_t)‖₁ over frames.
  double mean_self_motion(const PoseRegressor& r) const;

 private:
  Objective objective_;
  std::vector<std::vector<double>> pair_features_;
  std::vector<std::vector<double>> self_features_;
};

struct TraceRow {
  int iteration = 0;
  LossBreakdown loss;
  double cov_scales = 0.0;
};

struct OptimizeResult {
  std::vector<double> final_params;  // flat
  std::vector<TraceRow> trace;       // one row per iterate, including the last
  bool diverged = false;
};

struct FlatEvaluation {
  LossBreakdown loss;
  std::vector<double> gradient;
  double cov_scales = 0.0;
};

// Adam on a flat parameter vector. Stops early, flagging the result, when the
// objective exceeds `divergence_threshold`.
OptimizeResult adam_minimize(std::vector<double> x,
                             const std::function<FlatEvaluation(const std::vector<double>&)>& evaluate,
                             const AdamConfig& adam, int iterations,
                             double divergence_threshold = 1e6);

struct OptimizedA {
  ParamSetA params;
  OptimizeResult result;
};
struct OptimizedB {
  ParamSetB params;
  OptimizeResult result;
};

OptimizedA optimize(const ParamSetA& init, const RenderedSequence& seq, const ObjectiveConfig& cfg);
OptimizedB optimize(const ParamSetB& init, const RenderedSequence& seq, const ObjectiveConfig& cfg);

// Coefficient of variation of the per-frame scale factors exp(−log_scale).
double log_scale_cov(const std::vector<double>& log_scales);

}  // namespace poseconsist
