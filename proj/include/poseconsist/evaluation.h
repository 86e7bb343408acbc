#pragma once

#include <span>
#include <string>
#include <vector>

#include "poseconsist/image.h"
#include "poseconsist/lie.h"

namespace poseconsist {

struct DepthMetrics {
  double abs_rel = 0.0;
  double sq_rel = 0.0;
  double rmse = 0.0;
  double rmse_log = 0.0;
  double delta1 = 0.0;  // fraction with max(d̂/d, d/d̂) < 1.25
  double delta2 = 0.0;  // < 1.25²
  double delta3 = 0.0;  // < 1.25³
};

// Per-frame scale factors with population statistics; cov = sigma / mu.
struct ScaleSeries {
  std::vector<double> scales;
  double mu = 0.0;
  double sigma = 0.0;
  double cov = 0.0;

  static ScaleSeries from_scales(std::vector<double> scales);
};

struct SnippetATE {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> per_window;
};

enum class Scaling { kPerFrameMedian, kPerSequenceMedian, kNone };

std::string to_string(Scaling s);
Scaling parse_scaling(const std::string& s);

struct DepthEvalOptions {
  double d_max = kDefaultMaxDepth;
  double min_depth = 1e-3;
};

// Median; an even count averages the two central values. Throws on empty input.
double median(std::vector<double> values);

// Pixels with ground truth present (depth > 0).
ValidityMask gt_validity(const DepthMap& d_true);

// median(d_true) / median(d_pred) over valid pixels. Ground truth is clamped
// to [min_depth, d_max] first; the prediction is left alone so that the factor
// is exactly homogeneous in it. Throws DataError when no pixel is valid or the
// predicted median is not positive.
double scale_factor(const DepthMap& d_true, const DepthMap& d_pred, const ValidityMask& valid,
                    const DepthEvalOptions& opts = {});

ScaleSeries scale_series(std::span<const DepthMap> d_true, std::span<const DepthMap> d_pred,
                         std::span<const ValidityMask> valid, const DepthEvalOptions& opts = {});

// Errors are computed per frame over valid pixels and averaged over frames.
// Predictions are scaled (per frame by their own factor, or all frames by the
// median per-frame factor) and then clamped to [min_depth, d_max].
DepthMetrics eigen_metrics(std::span<const DepthMap> d_true, std::span<const DepthMap> d_pred,
                           std::span<const ValidityMask> valid, Scaling scaling,
                           const DepthEvalOptions& opts = {});

// `pred_relative[i]` and `gt_relative[i]` map camera i into camera i+1. Every
// window of `snippet` consecutive frames is chained from identity at its first
// frame, the predicted positions are aligned to ground truth by a single
// least-squares scale, and the window error is the position RMSE.
SnippetATE snippet_ate(std::span<const RigidPose> pred_relative,
                       std::span<const RigidPose> gt_relative, int n_frames, int snippet = 5);

}  // namespace poseconsist
