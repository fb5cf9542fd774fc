#pragma once

// Monte Carlo simulation of the asymptotic distributions behind the
// critical-value table.
//
// The sup-F limit with s breaks and q breaking coefficients is
//
//   sup over admissible partitions of [0,1] of
//     (1/(s q)) * ( sum_j ||W(l_j) - W(l_{j-1})||^2 / (l_j - l_{j-1})
//                   - ||W(1)||^2 )
//
// with W a q-dimensional standard Brownian motion and every segment at
// least eps long.  Discretised on a grid of n steps this is exactly a
// best-partition problem with segment "benefit"
// ||P_b - P_{a-1}||^2 / (b - a + 1) (P = partial sums of iid normals), so
// the same dynamic program used on data solves it, with negated benefits as
// costs.  One bottom-up pass yields sup-F for every break count at once.
//
// The double-maximum distributions are maxima of the per-rep sup-F values
// across break counts (weighted or not), and the sequential F(s+1|s) limit
// is the maximum of s+1 independent one-break functionals, so its level-a
// critical value is the (1-a)^(1/(s+1)) quantile of the one-break law.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "structbreak/critical_values.hpp"
#include "structbreak/dynamic_program.hpp"
#include "structbreak/partition.hpp"
#include "structbreak/rng.hpp"
#include "structbreak/segment_costs.hpp"

namespace structbreak {

struct SimulatedQuantiles {
  double q90 = 0.0, q95 = 0.0, q99 = 0.0;
  double se90 = 0.0, se95 = 0.0, se99 = 0.0;  // Monte Carlo standard errors
  int reps = 0;
  int grid = 0;
  std::uint64_t seed = 0;
};

namespace detail {

// Type-7 (linear interpolation) quantile of an ascending-sorted sample.
inline double sorted_quantile(const std::vector<double>& x, double p) {
  if (x.empty()) throw error("quantile of empty sample");
  if (p <= 0.0) return x.front();
  if (p >= 1.0) return x.back();
  const double pos = p * (static_cast<double>(x.size()) - 1.0);
  const auto lo = static_cast<size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= x.size()) return x.back();
  return x[lo] * (1.0 - frac) + x[lo + 1] * frac;
}

// Standard error of the sample p-quantile from the order-statistic bracket:
// ranks p*n +- 1.96*sqrt(n p(1-p)) span about 2*1.96 standard errors.
inline double sorted_quantile_se(const std::vector<double>& x, double p) {
  const double n = static_cast<double>(x.size());
  if (n < 16) return std::numeric_limits<double>::quiet_NaN();
  const double half = 1.959964 * std::sqrt(n * p * (1.0 - p));
  const double mid = p * n;
  auto clamp_idx = [&](double r) {
    long i = static_cast<long>(std::floor(r));
    if (i < 0) i = 0;
    if (i >= static_cast<long>(x.size())) i = static_cast<long>(x.size()) - 1;
    return static_cast<size_t>(i);
  };
  const double lo = x[clamp_idx(mid - half)];
  const double hi = x[clamp_idx(mid + half)];
  return (hi - lo) / (2.0 * 1.959964);
}

// One replication: fills supf[s-1] for s = 1..smax with the discretised
// sup-F limit values at q breaking coefficients.  `work` must be a table
// with T = grid and h = ceil(eps * grid); its cells are overwritten.
inline void supf_one_rep(int q, int smax, int grid, NormalSampler& rng,
                         SegmentCostTable& work, std::vector<double>& supf) {
  const int n = grid;
  const int h = work.h();
  // Partial sums P_t, t = 0..n, stored with stride q.
  std::vector<double> P(static_cast<size_t>(q) * (static_cast<size_t>(n) + 1));
  for (int c = 0; c < q; ++c) P[static_cast<size_t>(c)] = 0.0;
  for (int t = 1; t <= n; ++t) {
    const size_t cur = static_cast<size_t>(q) * static_cast<size_t>(t);
    const size_t prev = cur - static_cast<size_t>(q);
    for (int c = 0; c < q; ++c)
      P[cur + static_cast<size_t>(c)] =
          P[prev + static_cast<size_t>(c)] + rng();
  }
  // cost(a,b) = -||P_b - P_{a-1}||^2 / (b - a + 1)
  for (int a = 1; a + h - 1 <= n; ++a) {
    const double* pa = &P[static_cast<size_t>(q) * (static_cast<size_t>(a) - 1)];
    for (int b = a + h - 1; b <= n; ++b) {
      const double* pb = &P[static_cast<size_t>(q) * static_cast<size_t>(b)];
      double ss = 0.0;
      for (int c = 0; c < q; ++c) {
        const double d = pb[c] - pa[c];
        ss += d * d;
      }
      work.set(a, b, -ss / static_cast<double>(b - a + 1));
    }
  }
  double w1 = 0.0;  // ||W(1)||^2 = ||P_n||^2 / n
  {
    const double* pn = &P[static_cast<size_t>(q) * static_cast<size_t>(n)];
    for (int c = 0; c < q; ++c) w1 += pn[c] * pn[c];
    w1 /= static_cast<double>(n);
  }
  DpResult dp = optimal_partition(work, smax);
  supf.resize(static_cast<size_t>(smax));
  for (int s = 1; s <= smax; ++s) {
    const double gain = -dp.total_by_breaks[static_cast<size_t>(s)] - w1;
    supf[static_cast<size_t>(s) - 1] =
        gain / (static_cast<double>(s) * static_cast<double>(q));
  }
}

}  // namespace detail

// Per-replication sup-F draws for s = 1..smax: result[rep][s-1].
inline std::vector<std::vector<double>> simulate_supf_samples(
    int q, int smax, double eps, int reps, int grid, std::uint64_t seed) {
  if (q < 1) throw error("q must be >= 1");
  if (reps < 1 || grid < 16) throw error("need reps >= 1 and grid >= 16");
  if (smax < 1 || smax > max_breaks(eps))
    throw error("smax must lie in 1.." + std::to_string(max_breaks(eps)) +
                " for trimming " + std::to_string(eps));
  const int h = min_segment_length(eps, grid);
  SegmentCostTable work(grid, h);
  std::vector<std::vector<double>> out(static_cast<size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    NormalSampler rng(mix_seed(seed, static_cast<std::uint64_t>(r)));
    detail::supf_one_rep(q, smax, grid, rng, work, out[static_cast<size_t>(r)]);
  }
  return out;
}

namespace detail {

inline SimulatedQuantiles quantiles_of(std::vector<double>& sample, int reps,
                                       int grid, std::uint64_t seed) {
  std::sort(sample.begin(), sample.end());
  SimulatedQuantiles sq;
  sq.q90 = sorted_quantile(sample, 0.90);
  sq.q95 = sorted_quantile(sample, 0.95);
  sq.q99 = sorted_quantile(sample, 0.99);
  sq.se90 = sorted_quantile_se(sample, 0.90);
  sq.se95 = sorted_quantile_se(sample, 0.95);
  sq.se99 = sorted_quantile_se(sample, 0.99);
  sq.reps = reps;
  sq.grid = grid;
  sq.seed = seed;
  return sq;
}

}  // namespace detail

// Simulate the full set of table entries for one (q, trimming) pair from a
// single batch of replications: sup-F for s = 1..smax, both double-maximum
// tests over 1..smax, and the sequential F(s+1|s) values for s = 1..smax-1.
inline std::vector<CvEntry> simulate_cv_batch(int q, double eps, int smax,
                                              int reps, int grid,
                                              std::uint64_t seed) {
  auto mat = simulate_supf_samples(q, smax, eps, reps, grid, seed);
  const int eps_pct = trimming_percent(eps);
  std::vector<CvEntry> rows;
  const int levels[3] = {90, 95, 99};

  auto push = [&](CvKind kind, int s, int alpha_pct, double value, double se) {
    CvEntry e;
    e.key = CvKey{kind, q, s, eps_pct, alpha_pct};
    e.value = value;
    e.se = se;
    e.reps = reps;
    e.grid = grid;
    e.seed = seed;
    rows.push_back(e);
  };

  // sup-F quantiles per break count; keep the sorted columns around.
  std::vector<std::vector<double>> cols(static_cast<size_t>(smax));
  for (int s = 1; s <= smax; ++s) {
    auto& col = cols[static_cast<size_t>(s) - 1];
    col.resize(static_cast<size_t>(reps));
    for (int r = 0; r < reps; ++r)
      col[static_cast<size_t>(r)] =
          mat[static_cast<size_t>(r)][static_cast<size_t>(s) - 1];
    std::sort(col.begin(), col.end());
    for (int a : levels)
      push(CvKind::SupF, s, a,
           detail::sorted_quantile(col, a / 100.0),
           detail::sorted_quantile_se(col, a / 100.0));
  }

  // F(s+1|s): quantiles of the one-break law at powered probabilities.
  const auto& f1 = cols[0];
  for (int s = 1; s + 1 <= smax; ++s) {
    for (int a : levels) {
      const double p = std::pow(a / 100.0, 1.0 / (static_cast<double>(s) + 1.0));
      push(CvKind::FNext, s, a, detail::sorted_quantile(f1, p),
           detail::sorted_quantile_se(f1, p));
    }
  }

  // Double-maximum tests.  One row per upper bound su: the table keys the
  // range 1..su by its upper bound, so test ranges with other lower bounds
  // carry no tabulated critical values.
  for (int su = 1; su <= smax; ++su) {
    // Unweighted maximum over s = 1..su.
    std::vector<double> dmax(static_cast<size_t>(reps));
    for (int r = 0; r < reps; ++r) {
      double m = 0.0;
      for (int s = 1; s <= su; ++s)
        m = std::max(m, mat[static_cast<size_t>(r)][static_cast<size_t>(s) - 1]);
      dmax[static_cast<size_t>(r)] = m;
    }
    std::sort(dmax.begin(), dmax.end());
    for (int a : levels)
      push(CvKind::UDmax, su, a, detail::sorted_quantile(dmax, a / 100.0),
           detail::sorted_quantile_se(dmax, a / 100.0));

    // Weighted maximum: weight c(level,1)/c(level,s) equalises the marginal
    // rejection chance across break counts, so the weights differ by level.
    for (int a : levels) {
      const double c1 = detail::sorted_quantile(cols[0], a / 100.0);
      std::vector<double> weights(static_cast<size_t>(su));
      for (int s = 1; s <= su; ++s)
        weights[static_cast<size_t>(s) - 1] =
            c1 / detail::sorted_quantile(cols[static_cast<size_t>(s) - 1],
                                         a / 100.0);
      std::vector<double> wd(static_cast<size_t>(reps));
      for (int r = 0; r < reps; ++r) {
        double m = 0.0;
        for (int s = 1; s <= su; ++s)
          m = std::max(m, weights[static_cast<size_t>(s) - 1] *
                              mat[static_cast<size_t>(r)]
                                 [static_cast<size_t>(s) - 1]);
        wd[static_cast<size_t>(r)] = m;
      }
      std::sort(wd.begin(), wd.end());
      push(CvKind::WDmax, su, a, detail::sorted_quantile(wd, a / 100.0),
           detail::sorted_quantile_se(wd, a / 100.0));
    }
  }

  return rows;
}

// Simulated quantiles for a single table cell.  For FNext the s parameter is
// the break count under the null (critical values for F(s+1|s)).
inline SimulatedQuantiles simulate_critical_values(CvKind kind, int q, int s,
                                                   double eps, int reps,
                                                   int grid,
                                                   std::uint64_t seed) {
  SimulatedQuantiles sq;
  switch (kind) {
    case CvKind::SupF: {
      auto mat = simulate_supf_samples(q, s, eps, reps, grid, seed);
      std::vector<double> col(static_cast<size_t>(reps));
      for (int r = 0; r < reps; ++r)
        col[static_cast<size_t>(r)] =
            mat[static_cast<size_t>(r)][static_cast<size_t>(s) - 1];
      sq = detail::quantiles_of(col, reps, grid, seed);
      break;
    }
    case CvKind::FNext: {
      auto mat = simulate_supf_samples(q, 1, eps, reps, grid, seed);
      std::vector<double> col(static_cast<size_t>(reps));
      for (int r = 0; r < reps; ++r) col[static_cast<size_t>(r)] = mat[static_cast<size_t>(r)][0];
      std::sort(col.begin(), col.end());
      sq.reps = reps;
      sq.grid = grid;
      sq.seed = seed;
      auto at = [&](int a) {
        return std::pow(a / 100.0, 1.0 / (static_cast<double>(s) + 1.0));
      };
      sq.q90 = detail::sorted_quantile(col, at(90));
      sq.q95 = detail::sorted_quantile(col, at(95));
      sq.q99 = detail::sorted_quantile(col, at(99));
      sq.se90 = detail::sorted_quantile_se(col, at(90));
      sq.se95 = detail::sorted_quantile_se(col, at(95));
      sq.se99 = detail::sorted_quantile_se(col, at(99));
      break;
    }
    case CvKind::UDmax:
    case CvKind::WDmax: {
      auto rows = simulate_cv_batch(q, eps, s, reps, grid, seed);
      for (const auto& e : rows) {
        if (e.key.kind != kind || e.key.s != s) continue;
        if (e.key.alpha_pct == 90) { sq.q90 = e.value; sq.se90 = e.se; }
        if (e.key.alpha_pct == 95) { sq.q95 = e.value; sq.se95 = e.se; }
        if (e.key.alpha_pct == 99) { sq.q99 = e.value; sq.se99 = e.se; }
      }
      sq.reps = reps;
      sq.grid = grid;
      sq.seed = seed;
      break;
    }
  }
  return sq;
}

}  // namespace structbreak
