#pragma once

// BreakPartition: an ordered set of break positions splitting 1..T into
// regimes.  A break at position T_j means regime j ends at T_j (inclusive)
// and regime j+1 starts at T_j + 1.  Positions are 1-based.

#include <cmath>
#include <string>
#include <vector>

#include "structbreak/common.hpp"

namespace structbreak {

// Shortest admissible regime, h = ceil(eps * T).
inline int min_segment_length(double trimming, int T) {
  if (T < 1) throw error("T must be positive");
  int h = static_cast<int>(std::ceil(trimming * T - 1e-12));
  return h < 1 ? 1 : h;
}

// Largest number of breaks a trimming fraction admits asymptotically:
// s+1 regimes of length >= eps*T fit only while (s+1)*eps <= 1, and the two
// end regimes are conventionally held to a stricter margin, giving
// ceil(1/eps) - 2.
inline int max_breaks(double trimming) {
  if (!(trimming > 0.0 && trimming < 0.5))
    throw error("trimming must lie in (0, 0.5)");
  int m = static_cast<int>(std::ceil(1.0 / trimming - 1e-9)) - 2;
  return m < 0 ? 0 : m;
}

class BreakPartition {
 public:
  // No breaks: one regime covering 1..T.
  static BreakPartition none(int T) { return BreakPartition({}, T); }

  BreakPartition(std::vector<int> break_indices, int T)
      : breaks_(std::move(break_indices)), T_(T) {
    if (T_ < 1) throw error("partition needs a positive sample length");
    int prev = 0;
    for (int b : breaks_) {
      if (b < 1 || b > T_ - 1)
        throw error("break position " + std::to_string(b) +
                    " outside 1.." + std::to_string(T_ - 1));
      if (b <= prev)
        throw error("break positions must be strictly increasing");
      prev = b;
    }
  }

  int T() const { return T_; }
  int n_breaks() const { return static_cast<int>(breaks_.size()); }
  int n_regimes() const { return n_breaks() + 1; }
  const std::vector<int>& breaks() const { return breaks_; }

  // Regime (1-based) containing period t.
  int regime_of(int t) const {
    if (t < 1 || t > T_) throw error("period out of range");
    int j = 1;
    for (int b : breaks_) {
      if (t <= b) break;
      ++j;
    }
    return j;
  }

  // Inclusive [start, end] of regime j (1-based).
  std::pair<int, int> regime_range(int j) const {
    if (j < 1 || j > n_regimes()) throw error("regime index out of range");
    int start = (j == 1) ? 1 : breaks_[static_cast<size_t>(j) - 2] + 1;
    int end = (j == n_regimes()) ? T_ : breaks_[static_cast<size_t>(j) - 1];
    return {start, end};
  }

  // Every regime at least h = ceil(eps*T) periods long?
  bool feasible(double trimming) const {
    const int h = min_segment_length(trimming, T_);
    for (int j = 1; j <= n_regimes(); ++j) {
      auto [a, b] = regime_range(j);
      if (b - a + 1 < h) return false;
    }
    return true;
  }

  // Length-T vector: entry t-1 is the regime of period t.
  std::vector<int> regime_indicator() const {
    std::vector<int> out(static_cast<size_t>(T_));
    int j = 1;
    for (int t = 1; t <= T_; ++t) {
      if (j <= n_breaks() && t > breaks_[static_cast<size_t>(j) - 1]) ++j;
      out[static_cast<size_t>(t) - 1] = j;
    }
    return out;
  }

  bool operator==(const BreakPartition& o) const {
    return T_ == o.T_ && breaks_ == o.breaks_;
  }

 private:
  std::vector<int> breaks_;
  int T_;
};

inline std::vector<int> regime_indicator(const BreakPartition& partition, int T) {
  if (T != partition.T())
    throw error("regime_indicator: length " + std::to_string(T) +
                " does not match the partition's T = " +
                std::to_string(partition.T()));
  return partition.regime_indicator();
}

}  // namespace structbreak
