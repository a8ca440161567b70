#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "semharq/corpus.hpp"

namespace semharq {

// Positionwise mismatch fraction over max(len_ref, len_est).
inline double wer(const Sentence& reference, const Sentence& estimate) {
  int span = std::max(reference.length, estimate.length);
  if (span == 0) return 0.0;
  int wrong = 0;
  for (int i = 0; i < span; ++i) {
    int a = i < reference.length ? reference.ids[i] : -1;
    int b = i < estimate.length ? estimate.ids[i] : -2;
    wrong += a != b ? 1 : 0;
  }
  return static_cast<double>(wrong) / static_cast<double>(span);
}

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
  double half_width() const { return (hi - lo) / 2.0; }
};

// Wilson score interval at 95%.
inline Interval wilson_interval(long successes, long n) {
  if (n == 0) return {0.0, 1.0};
  constexpr double z = 1.959963984540054;
  double phat = static_cast<double>(successes) / static_cast<double>(n);
  double denom = 1.0 + z * z / n;
  double center = (phat + z * z / (2.0 * n)) / denom;
  double margin = z * std::sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - margin), std::min(1.0, center + margin)};
}

// 95% normal interval for a mean.
inline Interval mean_interval(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= std::max<size_t>(1, values.size() - 1);
  double half = 1.959963984540054 * std::sqrt(var / values.size());
  return {mean - half, mean + half};
}

}  // namespace semharq
