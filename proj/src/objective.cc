#include "poseconsist/objective.h"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "poseconsist/pose_consistency.h"
#include "poseconsist/view_synthesis.h"

namespace poseconsist {

void ObjectiveConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("objective.lambda must be >= 0");
  if (!(smoothness_weight >= 0.0)) throw std::invalid_argument("objective.smoothness_weight must be >= 0");
  if (iterations < 0) throw std::invalid_argument("objective.iterations must be >= 0");
  if (!(fd_step > 0.0)) throw std::invalid_argument("objective.fd_step must be > 0");
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("objective.learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0)) throw std::invalid_argument("objective.beta1 must lie in [0, 1)");
  if (!(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) throw std::invalid_argument("objective.beta2 must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw std::invalid_argument("objective.epsilon must be > 0");
  if (use_cyc && !skip_pairs) throw std::invalid_argument("objective.constraints: cyc requires skip_pairs");
  if (use_id && regime != Regime::kRegressor) {
    throw std::invalid_argument("objective.constraints: id requires the regressor regime");
  }
  photometric.validate();
}

struct Objective::FrozenSource {
  ValidityMask sample_valid;
  ValidityMask window_valid;
  ScalarMap base_err;
};

struct Objective::FrozenTerm {
  std::vector<FrozenSource> sources;
  ValidityMask kept;
  size_t n_kept = 0;
  double value = 0.0;
};

Objective::Objective(const RenderedSequence& seq, const ObjectiveConfig& cfg)
    : seq_(seq), cfg_(cfg), n_frames_(seq.size()) {
  cfg_.validate();
  seq_.validate();
  if (n_frames_ < 2) throw std::invalid_argument("objective: sequence needs at least 2 frames");
  if (cfg_.skip_pairs && n_frames_ < 3) {
    throw std::invalid_argument("objective: skip pairs need at least 3 frames");
  }
  pairs_ = make_pairs(n_frames_, cfg_.skip_pairs);
  offsets_ = cfg_.skip_pairs ? std::vector<int>{1, 2} : std::vector<int>{1};

  for (const auto& f : seq_.frames) moments_.push_back(kernels::window_moments(f));

  for (int offset : offsets_) {
    for (int t = 0; t < n_frames_; ++t) {
      ViewTerm term;
      term.target = t;
      term.offset = offset;
      for (int s : {t - offset, t + offset}) {
        if (s < 0 || s >= n_frames_) continue;
        term.sources.push_back(s);
        term.pairs.push_back(find_pair(pairs_, t, s));
      }
      const ImageGrid& target = seq_.frames[t];
      term.raw_best = ScalarMap(target.height, target.width, std::numeric_limits<double>::infinity());
      for (int s : term.sources) {
        ScalarMap err;
        kernels::photometric_error_map(target, moments_[t], seq_.frames[s], cfg_.photometric, err);
        for (size_t i = 0; i < err.size(); ++i) {
          term.raw_best.data[i] = std::min(term.raw_best.data[i], err.data[i]);
        }
      }
      terms_.push_back(std::move(term));
    }
  }

  for (int t = 0; t + 1 < n_frames_; ++t) {
    const int a = find_pair(pairs_, t, t + 1);
    const int b = find_pair(pairs_, t + 1, t);
    fb_.push_back({a, b});
    fb_.push_back({b, a});
  }
  if (cfg_.skip_pairs) {
    for (int t = 1; t + 1 < n_frames_; ++t) {
      cyc_.push_back({find_pair(pairs_, t - 1, t), find_pair(pairs_, t, t + 1),
                      find_pair(pairs_, t - 1, t + 1)});
      cyc_.push_back({find_pair(pairs_, t + 1, t), find_pair(pairs_, t, t - 1),
                      find_pair(pairs_, t + 1, t - 1)});
    }
  }
}

void Objective::warp_error(const ViewTerm& term, int slot, const FrozenSource& frozen,
                           double log_scale, const Twist& twist, ScalarMap& err) const {
  const DepthMap& gt = seq_.gt_depths[term.target];
  DepthMap depth(gt.height, gt.width);
  const double scale = std::exp(log_scale);
  for (size_t i = 0; i < depth.size(); ++i) depth.data[i] = gt.data[i] * scale;

  PixelCoords coords;
  ValidityMask unused;
  kernels::reproject(depth, exp_map(twist), seq_.k, coords, unused);
  ImageGrid synth;
  kernels::sample_bilinear_clamped(seq_.frames[term.sources[slot]], coords, frozen.sample_valid, synth);
  kernels::photometric_error_map(seq_.frames[term.target], moments_[term.target], synth,
                                 cfg_.photometric, err);
}

Objective::FrozenTerm Objective::freeze(const ViewTerm& term, double log_scale,
                                        std::span<const Twist> pair_twists) const {
  FrozenTerm st;
  const DepthMap& gt = seq_.gt_depths[term.target];
  DepthMap depth(gt.height, gt.width);
  const double scale = std::exp(log_scale);
  for (size_t i = 0; i < depth.size(); ++i) depth.data[i] = gt.data[i] * scale;

  for (size_t slot = 0; slot < term.sources.size(); ++slot) {
    FrozenSource src;
    PixelCoords coords;
    kernels::reproject(depth, exp_map(pair_twists[term.pairs[slot]]), seq_.k, coords, src.sample_valid);
    src.window_valid = erode_window(src.sample_valid);
    ImageGrid synth;
    kernels::sample_bilinear_clamped(seq_.frames[term.sources[slot]], coords, src.sample_valid, synth);
    kernels::photometric_error_map(seq_.frames[term.target], moments_[term.target], synth,
                                   cfg_.photometric, src.base_err);
    st.sources.push_back(std::move(src));
  }

  st.kept = ValidityMask(gt.height, gt.width, 0);
  for (size_t i = 0; i < st.kept.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& src : st.sources) {
      if (src.window_valid.data[i]) best = std::min(best, src.base_err.data[i]);
    }
    if (best < term.raw_best.data[i]) {
      st.kept.data[i] = 1;
      ++st.n_kept;
    }
  }
  std::vector<const ScalarMap*> errors;
  for (const auto& src : st.sources) errors.push_back(&src.base_err);
  st.value = masked_min_mean(st, errors);
  return st;
}

double Objective::masked_min_mean(const FrozenTerm& st, std::span<const ScalarMap* const> errors) {
  if (st.n_kept == 0) return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < st.kept.size(); ++i) {
    if (!st.kept.data[i]) continue;
    double best = std::numeric_limits<double>::infinity();
    for (size_t s = 0; s < errors.size(); ++s) {
      if (st.sources[s].window_valid.data[i]) best = std::min(best, errors[s]->data[i]);
    }
    sum += best;
  }
  return sum / static_cast<double>(st.n_kept);
}

double Objective::smoothness_at(int frame, double log_scale) const {
  const DepthMap& gt = seq_.gt_depths[frame];
  DepthMap depth(gt.height, gt.width);
  const double scale = std::exp(log_scale);
  for (size_t i = 0; i < depth.size(); ++i) depth.data[i] = gt.data[i] * scale;
  return smoothness_loss(depth, seq_.frames[frame]);
}

double Objective::fb_value(std::span<const Twist> twists) const {
  double sum = 0.0;
  for (const auto& in : fb_) {
    sum += forward_backward_loss({twists[in.forward], twists[in.backward], 1});
  }
  return fb_.empty() ? 0.0 : sum / static_cast<double>(fb_.size());
}

double Objective::cyc_value(std::span<const Twist> twists) const {
  double sum = 0.0;
  for (const auto& in : cyc_) {
    sum += cycle_loss({twists[in.prev_to_mid], twists[in.mid_to_next], twists[in.prev_to_next]});
  }
  return cyc_.empty() ? 0.0 : sum / static_cast<double>(cyc_.size());
}

double Objective::constraint_total(const LossBreakdown& b) const {
  double c = 0.0;
  if (cfg_.use_fb) c += b.fb;
  if (cfg_.use_id) c += b.id;
  if (cfg_.use_cyc) c += b.cyc;
  return c;
}

void Objective::finish(LossBreakdown& b) const {
  b.total = b.photometric + cfg_.smoothness_weight * b.smoothness + cfg_.lambda * constraint_total(b);
}

LossBreakdown Objective::evaluate(std::span<const double> log_scales,
                                  std::span<const Twist> pair_twists,
                                  std::span<const Twist> self_twists) const {
  if (static_cast<int>(log_scales.size()) != n_frames_ || pair_twists.size() != pairs_.size()) {
    throw std::invalid_argument("objective: parameter counts do not match the sequence");
  }
  LossBreakdown b;
  std::vector<double> values(terms_.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t i = 0; i < terms_.size(); ++i) {
    values[i] = freeze(terms_[i], log_scales[terms_[i].target], pair_twists).value;
  }
  for (double v : values) b.photometric += v / n_frames_;
  for (int t = 0; t < n_frames_; ++t) b.smoothness += smoothness_at(t, log_scales[t]) / n_frames_;
  b.fb = fb_value(pair_twists);
  b.cyc = cyc_value(pair_twists);
  for (const auto& xi : self_twists) b.id += identity_loss(xi) / static_cast<double>(self_twists.size());
  finish(b);
  return b;
}

namespace {

struct TermGradient {
  double value = 0.0;
  double d_log_scale = 0.0;
  std::vector<TwistGradient> d_twists;
  long bad_index = -1;  // first probe with a non-finite value
};

[[noreturn]] void non_finite(long index) {
  throw std::runtime_error("non-finite objective while probing parameter index " +
                           std::to_string(index));
}

}  // namespace

ObjectiveGradient Objective::gradient(std::span<const double> log_scales,
                                      std::span<const Twist> pair_twists,
                                      std::span<const Twist> self_twists,
                                      bool wrt_log_scales) const {
  if (static_cast<int>(log_scales.size()) != n_frames_ || pair_twists.size() != pairs_.size()) {
    throw std::invalid_argument("objective: parameter counts do not match the sequence");
  }
  const double h = cfg_.fd_step;
  const double inv_2h = 1.0 / (2.0 * h);
  // Flat index of twist component k of pair p, for diagnostics.
  auto twist_index = [&](int p, int k) { return static_cast<long>(n_frames_) + 6L * p + k; };

  std::vector<TermGradient> results(terms_.size());
#pragma omp parallel for schedule(dynamic)
  for (size_t ti = 0; ti < terms_.size(); ++ti) {
    const ViewTerm& term = terms_[ti];
    TermGradient& r = results[ti];
    const double ls = log_scales[term.target];
    const FrozenTerm st = freeze(term, ls, pair_twists);
    r.value = st.value;
    r.d_twists.assign(term.sources.size(), TwistGradient{});
    const size_t n_src = term.sources.size();
    std::vector<ScalarMap> probe(n_src);
    std::vector<const ScalarMap*> errors(n_src);

    if (wrt_log_scales) {
      double side[2];
      for (int sgn = 0; sgn < 2; ++sgn) {
        const double x = ls + (sgn == 0 ? h : -h);
        for (size_t s = 0; s < n_src; ++s) {
          warp_error(term, static_cast<int>(s), st.sources[s], x, pair_twists[term.pairs[s]], probe[s]);
          errors[s] = &probe[s];
        }
        side[sgn] = masked_min_mean(st, errors);
      }
      r.d_log_scale = (side[0] - side[1]) * inv_2h;
      if (!std::isfinite(side[0]) || !std::isfinite(side[1])) r.bad_index = term.target;
    }

    for (size_t s = 0; s < n_src; ++s) {
      for (size_t o = 0; o < n_src; ++o) errors[o] = &st.sources[o].base_err;
      for (int k = 0; k < 6; ++k) {
        double side[2];
        for (int sgn = 0; sgn < 2; ++sgn) {
          Twist xi = pair_twists[term.pairs[s]];
          xi[k] += sgn == 0 ? h : -h;
          warp_error(term, static_cast<int>(s), st.sources[s], ls, xi, probe[s]);
          errors[s] = &probe[s];
          side[sgn] = masked_min_mean(st, errors);
        }
        r.d_twists[s][k] = (side[0] - side[1]) * inv_2h;
        if ((!std::isfinite(side[0]) || !std::isfinite(side[1])) && r.bad_index < 0) {
          r.bad_index = twist_index(term.pairs[s], k);
        }
      }
    }
  }

  ObjectiveGradient g;
  g.pair_twists.assign(pairs_.size(), TwistGradient{});
  if (wrt_log_scales) g.log_scales.assign(n_frames_, 0.0);
  const double term_weight = 1.0 / n_frames_;
  for (size_t ti = 0; ti < terms_.size(); ++ti) {
    const TermGradient& r = results[ti];
    if (r.bad_index >= 0) non_finite(r.bad_index);
    g.value.photometric += r.value * term_weight;
    if (wrt_log_scales) g.log_scales[terms_[ti].target] += r.d_log_scale * term_weight;
    for (size_t s = 0; s < terms_[ti].pairs.size(); ++s) {
      for (int k = 0; k < 6; ++k) {
        g.pair_twists[terms_[ti].pairs[s]][k] += r.d_twists[s][k] * term_weight;
      }
    }
  }

  const double sw = cfg_.smoothness_weight;
  for (int t = 0; t < n_frames_; ++t) {
    g.value.smoothness += smoothness_at(t, log_scales[t]) / n_frames_;
    if (wrt_log_scales && sw > 0.0) {
      const double d = (smoothness_at(t, log_scales[t] + h) - smoothness_at(t, log_scales[t] - h)) * inv_2h;
      if (!std::isfinite(d)) non_finite(t);
      g.log_scales[t] += sw * d / n_frames_;
    }
  }

  g.value.fb = fb_value(pair_twists);
  g.value.cyc = cyc_value(pair_twists);

  // Each constraint instance only touches its own twists.
  auto probe_twists = [&](std::span<const int> involved, double weight, auto&& instance_value) {
    std::vector<Twist> local(involved.size());
    for (size_t j = 0; j < involved.size(); ++j) local[j] = pair_twists[involved[j]];
    for (size_t j = 0; j < involved.size(); ++j) {
      for (int k = 0; k < 6; ++k) {
        const double saved = local[j][k];
        local[j][k] = saved + h;
        const double up = instance_value(local);
        local[j][k] = saved - h;
        const double down = instance_value(local);
        local[j][k] = saved;
        if (!std::isfinite(up) || !std::isfinite(down)) non_finite(twist_index(involved[j], k));
        g.pair_twists[involved[j]][k] += weight * (up - down) * inv_2h;
      }
    }
  };

  if (cfg_.use_fb && cfg_.lambda > 0.0 && !fb_.empty()) {
    const double w = cfg_.lambda / static_cast<double>(fb_.size());
    for (const auto& in : fb_) {
      const int involved[] = {in.forward, in.backward};
      probe_twists(involved, w, [](const std::vector<Twist>& x) {
        return forward_backward_loss({x[0], x[1], 1});
      });
    }
  }
  if (cfg_.use_cyc && cfg_.lambda > 0.0 && !cyc_.empty()) {
    const double w = cfg_.lambda / static_cast<double>(cyc_.size());
    for (const auto& in : cyc_) {
      const int involved[] = {in.prev_to_mid, in.mid_to_next, in.prev_to_next};
      probe_twists(involved, w, [](const std::vector<Twist>& x) {
        return cycle_loss({x[0], x[1], x[2]});
      });
    }
  }

  g.self_twists.assign(self_twists.size(), TwistGradient{});
  for (const auto& xi : self_twists) {
    g.value.id += identity_loss(xi) / static_cast<double>(self_twists.size());
  }
  if (cfg_.use_id && cfg_.lambda > 0.0 && !self_twists.empty()) {
    const double w = cfg_.lambda / static_cast<double>(self_twists.size());
    for (size_t f = 0; f < self_twists.size(); ++f) {
      for (int k = 0; k < 6; ++k) {
        Twist up = self_twists[f], down = self_twists[f];
        up[k] += h;
        down[k] -= h;
        g.self_twists[f][k] = w * (identity_loss(up) - identity_loss(down)) * inv_2h;
      }
    }
  }

  finish(g.value);
  return g;
}

}  // namespace poseconsist
