#pragma once

#include <vector>

#include "poseconsist/lie.h"

namespace poseconsist {

// An ordered frame pair; the twist attached to it maps camera `from`
// coordinates into camera `to` coordinates.
struct FramePair {
  int from = 0;
  int to = 0;
  bool operator==(const FramePair&) const = default;
};

// Adjacent pairs in both directions (t→t+1, t+1→t for every t), followed by
// the offset-2 pairs in both directions when `skip_pairs` is set.
std::vector<FramePair> make_pairs(int n_frames, bool skip_pairs);

// Index of (from, to) in a list built by make_pairs, or −1.
int find_pair(const std::vector<FramePair>& pairs, int from, int to);

// Directly optimized parameters: one log depth scale per frame (predicted
// depth = ground-truth shape · exp(log_scale)) and one twist per pair.
struct ParamSetA {
  std::vector<double> log_scales;
  std::vector<FramePair> pairs;
  std::vector<Twist> twists;

  int n_frames() const { return static_cast<int>(log_scales.size()); }
  size_t n_scalars() const { return log_scales.size() + 6 * twists.size(); }

  std::vector<double> flatten() const;
  void unflatten(const std::vector<double>& x);
};

}  // namespace poseconsist
