#include "poseconsist/evaluation.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "poseconsist/errors.h"

namespace poseconsist {

ScaleSeries ScaleSeries::from_scales(std::vector<double> scales) {
  ScaleSeries s;
  s.scales = std::move(scales);
  if (s.scales.empty()) throw DataError("scale series is empty");
  for (double x : s.scales) s.mu += x;
  s.mu /= static_cast<double>(s.scales.size());
  double var = 0.0;
  for (double x : s.scales) var += (x - s.mu) * (x - s.mu);
  s.sigma = std::sqrt(var / static_cast<double>(s.scales.size()));
  s.cov = s.sigma / s.mu;
  return s;
}

std::string to_string(Scaling s) {
  switch (s) {
    case Scaling::kPerFrameMedian: return "per_frame_median";
    case Scaling::kPerSequenceMedian: return "per_sequence_median";
    case Scaling::kNone: return "none";
  }
  return "none";
}

Scaling parse_scaling(const std::string& s) {
  if (s == "per_frame_median") return Scaling::kPerFrameMedian;
  if (s == "per_sequence_median") return Scaling::kPerSequenceMedian;
  if (s == "none") return Scaling::kNone;
  throw std::invalid_argument("unknown scaling mode '" + s + "'");
}

double median(std::vector<double> values) {
  if (values.empty()) throw DataError("median of an empty set");
  const size_t n = values.size();
  const auto mid = values.begin() + n / 2;
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

ValidityMask gt_validity(const DepthMap& d_true) {
  ValidityMask m(d_true.height, d_true.width, 0);
  for (size_t i = 0; i < m.size(); ++i) m.data[i] = d_true.data[i] > 0.0 ? 1 : 0;
  return m;
}

namespace {

void check_shapes(const DepthMap& a, const DepthMap& b, const ValidityMask& m) {
  if (!b.same_shape(a.height, a.width) || !m.same_shape(a.height, a.width)) {
    throw DataError("depth evaluation: dimension mismatch");
  }
}

void check_counts(size_t a, size_t b, size_t c) {
  if (a != b || a != c) throw DataError("depth evaluation: frame counts differ");
  if (a == 0) throw DataError("depth evaluation: no frames");
}

DepthMetrics frame_metrics(const DepthMap& d_true, const DepthMap& d_pred, const ValidityMask& valid,
                           double factor, const DepthEvalOptions& opts) {
  DepthMetrics m;
  double sq = 0.0, sq_log = 0.0;
  size_t n = 0;
  for (size_t i = 0; i < d_true.size(); ++i) {
    if (!valid.data[i]) continue;
    const double gt = d_true.data[i];
    const double pr = std::clamp(d_pred.data[i] * factor, opts.min_depth, opts.d_max);
    const double diff = pr - gt;
    m.abs_rel += std::abs(diff) / gt;
    m.sq_rel += diff * diff / gt;
    sq += diff * diff;
    const double dl = std::log(pr) - std::log(gt);
    sq_log += dl * dl;
    const double ratio = std::max(pr / gt, gt / pr);
    if (ratio < 1.25) m.delta1 += 1.0;
    if (ratio < 1.25 * 1.25) m.delta2 += 1.0;
    if (ratio < 1.25 * 1.25 * 1.25) m.delta3 += 1.0;
    ++n;
  }
  if (n == 0) throw DataError("depth evaluation: frame without valid pixels");
  const double dn = static_cast<double>(n);
  m.abs_rel /= dn;
  m.sq_rel /= dn;
  m.rmse = std::sqrt(sq / dn);
  m.rmse_log = std::sqrt(sq_log / dn);
  m.delta1 /= dn;
  m.delta2 /= dn;
  m.delta3 /= dn;
  return m;
}

}  // namespace

double scale_factor(const DepthMap& d_true, const DepthMap& d_pred, const ValidityMask& valid,
                    const DepthEvalOptions& opts) {
  check_shapes(d_true, d_pred, valid);
  std::vector<double> t, p;
  for (size_t i = 0; i < d_true.size(); ++i) {
    if (!valid.data[i]) continue;
    t.push_back(std::clamp(d_true.data[i], opts.min_depth, opts.d_max));
    p.push_back(d_pred.data[i]);
  }
  if (t.empty()) throw DataError("scale_factor: no valid pixels");
  const double mp = median(std::move(p));
  if (!(mp > 0.0)) throw DataError("scale_factor: predicted median is not positive");
  return median(std::move(t)) / mp;
}

ScaleSeries scale_series(std::span<const DepthMap> d_true, std::span<const DepthMap> d_pred,
                         std::span<const ValidityMask> valid, const DepthEvalOptions& opts) {
  check_counts(d_true.size(), d_pred.size(), valid.size());
  if (d_true.size() < 2) throw DataError("scale_series: need at least 2 frames");
  std::vector<double> scales;
  for (size_t f = 0; f < d_true.size(); ++f) {
    scales.push_back(scale_factor(d_true[f], d_pred[f], valid[f], opts));
  }
  return ScaleSeries::from_scales(std::move(scales));
}

DepthMetrics eigen_metrics(std::span<const DepthMap> d_true, std::span<const DepthMap> d_pred,
                           std::span<const ValidityMask> valid, Scaling scaling,
                           const DepthEvalOptions& opts) {
  check_counts(d_true.size(), d_pred.size(), valid.size());
  const size_t n = d_true.size();
  std::vector<double> factors(n, 1.0);
  if (scaling != Scaling::kNone) {
    for (size_t f = 0; f < n; ++f) {
      check_shapes(d_true[f], d_pred[f], valid[f]);
      factors[f] = scale_factor(d_true[f], d_pred[f], valid[f], opts);
    }
    if (scaling == Scaling::kPerSequenceMedian) {
      const double shared = median(factors);
      std::fill(factors.begin(), factors.end(), shared);
    }
  }
  DepthMetrics mean;
  for (size_t f = 0; f < n; ++f) {
    check_shapes(d_true[f], d_pred[f], valid[f]);
    const DepthMetrics m = frame_metrics(d_true[f], d_pred[f], valid[f], factors[f], opts);
    mean.abs_rel += m.abs_rel;
    mean.sq_rel += m.sq_rel;
    mean.rmse += m.rmse;
    mean.rmse_log += m.rmse_log;
    mean.delta1 += m.delta1;
    mean.delta2 += m.delta2;
    mean.delta3 += m.delta3;
  }
  const double dn = static_cast<double>(n);
  mean.abs_rel /= dn;
  mean.sq_rel /= dn;
  mean.rmse /= dn;
  mean.rmse_log /= dn;
  mean.delta1 /= dn;
  mean.delta2 /= dn;
  mean.delta3 /= dn;
  return mean;
}

SnippetATE snippet_ate(std::span<const RigidPose> pred_relative,
                       std::span<const RigidPose> gt_relative, int n_frames, int snippet) {
  if (snippet < 2) throw std::invalid_argument("snippet_ate: snippet length must be >= 2");
  if (n_frames < snippet) {
    throw DataError("snippet_ate: sequence of " + std::to_string(n_frames) +
                    " frames is shorter than the snippet length " + std::to_string(snippet));
  }
  const size_t needed = static_cast<size_t>(n_frames - 1);
  if (pred_relative.size() < needed || gt_relative.size() < needed) {
    throw DataError("snippet_ate: relative poses do not cover every adjacent pair");
  }

  auto positions = [&](std::span<const RigidPose> rel, int start) {
    std::vector<Vec3> p{Vec3::Zero()};
    RigidPose chained;  // camera `start` → camera start+j
    for (int j = 1; j < snippet; ++j) {
      chained = compose(rel[start + j - 1], chained);
      p.push_back(inverse(chained).translation);
    }
    return p;
  };

  SnippetATE ate;
  for (int start = 0; start + snippet <= n_frames; ++start) {
    const auto pred = positions(pred_relative, start);
    const auto gt = positions(gt_relative, start);
    double num = 0.0, den = 0.0;
    for (int j = 0; j < snippet; ++j) {
      num += pred[j].dot(gt[j]);
      den += pred[j].squaredNorm();
    }
    const double s = den > 0.0 ? num / den : 0.0;
    double err = 0.0;
    for (int j = 0; j < snippet; ++j) err += (s * pred[j] - gt[j]).squaredNorm();
    ate.per_window.push_back(std::sqrt(err / snippet));
  }
  for (double e : ate.per_window) ate.mean += e;
  ate.mean /= static_cast<double>(ate.per_window.size());
  double var = 0.0;
  for (double e : ate.per_window) var += (e - ate.mean) * (e - ate.mean);
  ate.std = std::sqrt(var / static_cast<double>(ate.per_window.size()));
  return ate;
}

}  // namespace poseconsist
