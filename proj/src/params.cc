#include "poseconsist/params.h"

#include <stdexcept>

namespace poseconsist {

std::vector<FramePair> make_pairs(int n_frames, bool skip_pairs) {
  std::vector<FramePair> pairs;
  const int max_offset = skip_pairs ? 2 : 1;
  for (int offset = 1; offset <= max_offset; ++offset) {
    for (int t = 0; t + offset < n_frames; ++t) {
      pairs.push_back({t, t + offset});
      pairs.push_back({t + offset, t});
    }
  }
  return pairs;
}

int find_pair(const std::vector<FramePair>& pairs, int from, int to) {
  for (size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].from == from && pairs[i].to == to) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> ParamSetA::flatten() const {
  std::vector<double> x(log_scales);
  x.reserve(n_scalars());
  for (const auto& xi : twists) {
    for (int k = 0; k < 6; ++k) x.push_back(xi[k]);
  }
  return x;
}

void ParamSetA::unflatten(const std::vector<double>& x) {
  if (x.size() != n_scalars()) throw std::invalid_argument("ParamSetA: flat vector size mismatch");
  const size_t n = log_scales.size();
  for (size_t i = 0; i < n; ++i) log_scales[i] = x[i];
  for (size_t p = 0; p < twists.size(); ++p) {
    for (int k = 0; k < 6; ++k) twists[p][k] = x[n + 6 * p + k];
  }
}

}  // namespace poseconsist
