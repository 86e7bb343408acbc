#pragma once

#include <array>
#include <span>
#include <vector>

#include "poseconsist/kernels.h"
#include "poseconsist/params.h"
#include "poseconsist/synthetic_world.h"

namespace poseconsist {

// A: per-frame log depth scales and per-pair twists are free parameters.
// B: twists come from a shared linear regressor on image pairs; depth is the
//    ground truth. Only B can exercise the identity constraint meaningfully.
enum class Regime { kDirect, kRegressor };

struct AdamConfig {
  double learning_rate = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct ObjectiveConfig {
  Regime regime = Regime::kDirect;
  double lambda = 0.1;
  bool use_fb = false;
  bool use_id = false;
  bool use_cyc = false;
  double smoothness_weight = 1e-3;
  PhotometricConfig photometric;
  AdamConfig adam;
  int iterations = 60;
  double fd_step = 1e-4;
  // Adds offset-2 pairs (and their photometric terms); required by cyc.
  bool skip_pairs = true;
  double divergence_threshold = 1e6;

  void validate() const;
};

struct LossBreakdown {
  double photometric = 0.0;
  double smoothness = 0.0;
  double fb = 0.0;
  double id = 0.0;
  double cyc = 0.0;
  double total = 0.0;
};

using TwistGradient = std::array<double, 6>;

struct ObjectiveGradient {
  LossBreakdown value;
  std::vector<double> log_scales;          // empty unless requested
  std::vector<TwistGradient> pair_twists;
  std::vector<TwistGradient> self_twists;  // twists estimated on (I_t, I_t)
};

// The composite loss over a sequence:
//   photometric + w_s·smoothness + λ·(enabled subset of fb, id, cyc).
// The photometric part sums, over frame offsets n ∈ {±1} (and {±2} with skip
// pairs), the mean over target frames of the auto-masked minimum reprojection
// error. Constraint terms are means over their instances, both signs of n
// included. All terms are reported whether or not they are enabled.
class Objective {
 public:
  Objective(const RenderedSequence& seq, const ObjectiveConfig& cfg);

  const std::vector<FramePair>& pairs() const { return pairs_; }
  int n_frames() const { return n_frames_; }

  LossBreakdown evaluate(std::span<const double> log_scales, std::span<const Twist> pair_twists,
                         std::span<const Twist> self_twists) const;

  // Central differences with step cfg.fd_step. Validity and auto-masks are
  // computed once at the given point and held fixed for all probes, the way a
  // mask is a constant under automatic differentiation.
  ObjectiveGradient gradient(std::span<const double> log_scales,
                             std::span<const Twist> pair_twists,
                             std::span<const Twist> self_twists, bool wrt_log_scales) const;

 private:
  struct ViewTerm {
    int target = 0;
    int offset = 0;
    std::vector<int> sources;  // source frames
    std::vector<int> pairs;    // pair index target→source
    ScalarMap raw_best;        // best error of the unwarped neighbors
  };
  struct FbInstance {
    int forward = 0;
    int backward = 0;
  };
  struct CycInstance {
    int prev_to_mid = 0;
    int mid_to_next = 0;
    int prev_to_next = 0;
  };
  struct FrozenSource;
  struct FrozenTerm;

  FrozenTerm freeze(const ViewTerm& term, double log_scale,
                    std::span<const Twist> pair_twists) const;
  void warp_error(const ViewTerm& term, int slot, const FrozenSource& frozen, double log_scale,
                  const Twist& twist, ScalarMap& err) const;
  static double masked_min_mean(const FrozenTerm& state, std::span<const ScalarMap* const> errors);

  double smoothness_at(int frame, double log_scale) const;
  double fb_value(std::span<const Twist> twists) const;
  double cyc_value(std::span<const Twist> twists) const;
  double constraint_total(const LossBreakdown& b) const;
  void finish(LossBreakdown& b) const;

  const RenderedSequence& seq_;
  ObjectiveConfig cfg_;
  int n_frames_ = 0;
  std::vector<FramePair> pairs_;
  std::vector<WindowMoments> moments_;
  std::vector<ViewTerm> terms_;
  std::vector<int> offsets_;
  std::vector<FbInstance> fb_;
  std::vector<CycInstance> cyc_;
};

}  // namespace poseconsist
