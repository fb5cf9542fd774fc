#pragma once

// Optimal break placement over a segment cost table.
//
// optimal_partition runs the O(T^2) dynamic program of least-squares break
// dating: V[m][t] = best cost of splitting t..T into m+1 admissible
// segments, built bottom-up, so one pass yields the optimum for every break
// count up to the requested s.  Ties go to the lexicographically smallest
// break vector (scan candidate cuts in ascending order, keep strict
// improvements only).
//
// grid_search_oracle enumerates every admissible partition outright.  It
// exists as an independent correctness check on the dynamic program and
// refuses instances with more than ~1e7 partitions.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "structbreak/common.hpp"
#include "structbreak/partition.hpp"
#include "structbreak/segment_costs.hpp"

namespace structbreak {

struct DpResult {
  BreakPartition partition = BreakPartition::none(1);  // optimum for s breaks
  double total = 0.0;                  // its total cost
  std::vector<double> total_by_breaks; // [m] = optimal total with m breaks, m = 0..s
  std::vector<BreakPartition> partition_by_breaks;  // matching partitions
  std::uint64_t cells_examined = 0;    // candidate (segment, tail) pairs touched
};

inline DpResult optimal_partition(const SegmentCostTable& costs, int s, int h) {
  const int T = costs.T();
  if (h < costs.h())
    throw error("minimum segment length " + std::to_string(h) +
                " below the table's admissible length " +
                std::to_string(costs.h()));
  if (s < 0) throw error("number of breaks must be nonnegative");
  if (static_cast<long long>(s + 1) * h > T)
    throw error("infeasible: " + std::to_string(s + 1) + " segments of length >= " +
                std::to_string(h) + " do not fit in T = " + std::to_string(T));

  // V[m][t-1]: best cost splitting t..T into m+1 segments; arg[m][t-1]: the
  // first cut (end of the first segment) achieving it.
  std::vector<std::vector<double>> V(static_cast<size_t>(s) + 1,
      std::vector<double>(static_cast<size_t>(T),
                          std::numeric_limits<double>::infinity()));
  std::vector<std::vector<int>> arg(
      static_cast<size_t>(s) + 1, std::vector<int>(static_cast<size_t>(T), -1));
  std::uint64_t examined = 0;

  for (int t = 1; t + h - 1 <= T; ++t) V[0][static_cast<size_t>(t) - 1] = costs.cost(t, T);

  for (int m = 1; m <= s; ++m) {
    // t..T must hold m+1 segments: t <= T - (m+1)h + 1; the first cut b
    // ranges over [t+h-1, T - m*h].
    for (int t = 1; t <= T - (m + 1) * h + 1; ++t) {
      double best = std::numeric_limits<double>::infinity();
      int best_b = -1;
      for (int b = t + h - 1; b <= T - m * h; ++b) {
        const double tail = V[static_cast<size_t>(m) - 1][static_cast<size_t>(b)];
        const double c = costs.cost(t, b) + tail;
        ++examined;
        if (c < best) {
          best = c;
          best_b = b;
        }
      }
      V[static_cast<size_t>(m)][static_cast<size_t>(t) - 1] = best;
      arg[static_cast<size_t>(m)][static_cast<size_t>(t) - 1] = best_b;
    }
  }

  DpResult out;
  out.total_by_breaks.reserve(static_cast<size_t>(s) + 1);
  out.partition_by_breaks.reserve(static_cast<size_t>(s) + 1);
  for (int m = 0; m <= s; ++m) {
    out.total_by_breaks.push_back(V[static_cast<size_t>(m)][0]);
    std::vector<int> cuts;
    cuts.reserve(static_cast<size_t>(m));
    int t = 1;
    for (int level = m; level >= 1; --level) {
      const int b = arg[static_cast<size_t>(level)][static_cast<size_t>(t) - 1];
      cuts.push_back(b);
      t = b + 1;
    }
    out.partition_by_breaks.emplace_back(std::move(cuts), T);
  }
  out.partition = out.partition_by_breaks.back();
  out.total = out.total_by_breaks.back();
  out.cells_examined = examined;
  return out;
}

inline DpResult optimal_partition(const SegmentCostTable& costs, int s) {
  return optimal_partition(costs, s, costs.h());
}

// Count of admissible partitions with s breaks and minimum length h in T
// periods: C(T - (s+1)(h-1) - 1, s), computed in floating point for the
// size guard.
inline double count_partitions(int T, int h, int s) {
  const double n = static_cast<double>(T) - (static_cast<double>(s) + 1) * (h - 1) - 1;
  if (n < s) return 0.0;
  double c = 1.0;
  for (int i = 1; i <= s; ++i) c *= (n - s + i) / i;
  return c;
}

inline DpResult grid_search_oracle(const SegmentCostTable& costs, int s, int h) {
  const int T = costs.T();
  if (h < costs.h())
    throw error("minimum segment length " + std::to_string(h) +
                " below the table's admissible length " +
                std::to_string(costs.h()));
  if (s < 0) throw error("number of breaks must be nonnegative");
  if (static_cast<long long>(s + 1) * h > T)
    throw error("infeasible: " + std::to_string(s + 1) + " segments of length >= " +
                std::to_string(h) + " do not fit in T = " + std::to_string(T));
  const double count = count_partitions(T, h, s);
  if (count > 1e7)
    throw error("grid search would enumerate " + std::to_string(count) +
                " partitions; refusing (limit 1e7)");

  DpResult out;
  out.total = std::numeric_limits<double>::infinity();
  std::vector<int> cuts(static_cast<size_t>(s));
  std::vector<int> best;
  std::uint64_t examined = 0;

  // Odometer enumeration in ascending lexicographic order.
  auto recurse = [&](auto&& self, int level, int start, double acc) -> void {
    if (level == s) {
      const double c = acc + costs.cost(start, T);
      ++examined;
      if (c < out.total) {
        out.total = c;
        best = cuts;
      }
      return;
    }
    // cut b ends the current segment; leave room for the remaining ones
    for (int b = start + h - 1; b <= T - (s - level) * h; ++b) {
      cuts[static_cast<size_t>(level)] = b;
      self(self, level + 1, b + 1, acc + costs.cost(start, b));
    }
  };
  recurse(recurse, 0, 1, 0.0);

  out.partition = BreakPartition(best, T);
  out.partition_by_breaks = {out.partition};
  out.total_by_breaks = {out.total};
  out.cells_examined = examined;
  return out;
}

inline DpResult grid_search_oracle(const SegmentCostTable& costs, int s) {
  return grid_search_oracle(costs, s, costs.h());
}

}  // namespace structbreak
