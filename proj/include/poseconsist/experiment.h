#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "poseconsist/config.h"
#include "poseconsist/evaluation.h"
#include "poseconsist/optimization.h"

namespace poseconsist {

inline constexpr std::array<Scaling, 3> kAllScalings = {
    Scaling::kPerFrameMedian, Scaling::kPerSequenceMedian, Scaling::kNone};

// What a run predicts for a sequence: a depth map per frame and the motion
// from each frame to the next.
struct Prediction {
  std::vector<DepthMap> depths;
  std::vector<RigidPose> relative;  // relative[t] maps camera t into camera t+1
};

struct PredictionMetrics {
  ScaleSeries scales;
  std::array<DepthMetrics, 3> depth;  // in kAllScalings order
  SnippetATE ate;
};

struct VariantOutcome {
  Variant variant;
  OptimizeResult result;
  ParamSetA params_a;  // Regime A only
  ParamSetB params_b;  // Regime B only
  Prediction prediction;
  PredictionMetrics metrics;
  double self_motion = 0.0;  // mean ‖regressor(I_t, I_t)‖₁, Regime B only
};

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::vector<VariantOutcome> variants;
};

struct VariantSummary {
  std::string name;
  double median_cov = 0.0;
  double median_ate = 0.0;
  double median_self_motion = 0.0;
  // 1 − median_cov / baseline median_cov; 0 for the baseline itself.
  double cov_reduction = 0.0;
};

struct ExperimentResult {
  std::vector<SeedOutcome> seeds;
  std::vector<VariantSummary> summary;
};

RenderedSequence make_sequence(const ExperimentConfig& cfg, std::uint64_t seed);
ParamSetA initial_params_a(const RenderedSequence& seq, const ExperimentConfig& cfg,
                           std::uint64_t seed);
PredictionMetrics evaluate_prediction(const RenderedSequence& seq, const Prediction& pred,
                                      const EvaluationParams& eval);
VariantOutcome run_variant(const RenderedSequence& seq, const ExperimentConfig& cfg,
                           const Variant& variant, std::uint64_t seed);
SeedOutcome run_seed(const RenderedSequence& seq, const ExperimentConfig& cfg, std::uint64_t seed);
// Medians over seeds per variant. The baseline reference is the variant named
// "baseline" when present.
std::vector<VariantSummary> summarize(const std::vector<SeedOutcome>& seeds);
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Camera-to-world poses obtained by chaining relative motions from identity.
std::vector<RigidPose> chain_poses(const std::vector<RigidPose>& relative);
// Motion from each frame to the next, given camera-to-world poses.
std::vector<RigidPose> adjacent_relative(const std::vector<RigidPose>& world);

}  // namespace poseconsist
