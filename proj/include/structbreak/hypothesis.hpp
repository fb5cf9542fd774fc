#pragma once
// Tests for an unknown number of breaks: sup-F against a fixed alternative,
// the double-maximum tests over a range of break counts, the sequential
// F(s+1|s) test, and the break-count estimator built from it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "structbreak/chow.hpp"
#include "structbreak/critical_values.hpp"
#include "structbreak/estimate.hpp"

namespace structbreak {

namespace detail {

inline void append_note(TestOutcome& out, const std::string& note) {
  if (!out.notes.empty()) out.notes += "; ";
  out.notes += note;
}

// Attach the three tabulated quantiles for (kind, q, s) if all are present;
// otherwise leave the outcome without critical values and explain why.
inline void attach_criticals(TestOutcome& out, const CriticalValueTable* table,
                             CvKind kind, int q, int s, double eps) {
  if (table == nullptr) {
    append_note(out, "no critical value table supplied");
    return;
  }
  const int eps_pct = trimming_percent(eps);
  const auto e90 = table->find(kind, q, s, eps, 90);
  const auto e95 = table->find(kind, q, s, eps, 95);
  const auto e99 = table->find(kind, q, s, eps, 99);
  if (!e90 || !e95 || !e99) {
    append_note(out, "critical values not tabulated for " +
                         to_string(kind) + " q=" + std::to_string(q) +
                         " s=" + std::to_string(s) + " trimming=" +
                         std::to_string(eps_pct) +
                         "%; regenerate the table with the simulate-cv "
                         "command");
    return;
  }
  out.set_criticals(e90->value, e95->value, e99->value);
}

inline bool reject_at(const TestOutcome& out, int level_pct) {
  switch (level_pct) {
    case 90: return out.reject90;
    case 95: return out.reject95;
    case 99: return out.reject99;
    default: throw error("decision level must be 90, 95, or 99");
  }
}

}  // namespace detail

// sup-F test of no breaks against exactly s breaks.  The supremum over
// admissible partitions is attained at the least-squares break dates: with
// the plain variance estimator the F statistic is a fixed monotone transform
// of the unrestricted sum of squared residuals, so minimising one maximises
// the other.  Robust variance estimators evaluate the statistic at the same
// least-squares dates, which is the conventional operational choice.
inline TestOutcome sup_f(const PanelDataset& data, const ModelSpec& spec,
                         int s, const CriticalValueTable* table = nullptr) {
  if (s < 1) throw error("sup-F needs at least one break under the alternative");
  BreakEstimates est = estimate_breaks(data, spec, s);
  TestOutcome out = chow_f(data, spec, est.partition);
  out.hypothesis = "supF(" + std::to_string(s) + ")";
  // The fixed-breaks F reference does not apply when the dates are estimated;
  // critical values come from the simulated sup-F limit law instead.
  out.has_p = false;
  out.p_value = std::numeric_limits<double>::quiet_NaN();
  out.p_value_stated = std::numeric_limits<double>::quiet_NaN();
  out.has_criticals = false;
  out.reject90 = out.reject95 = out.reject99 = false;
  if (spec.vce != Vce::Ssr)
    detail::append_note(out,
                        "robust variance: statistic evaluated at the "
                        "least-squares break dates");
  detail::attach_criticals(out, table, CvKind::SupF, spec.q_eff(data.n_units()),
                           s, spec.trimming);
  return out;
}

// Double-maximum tests over break counts s_lo..s_hi.  The unweighted variant
// takes the largest sup-F value; the weighted variant first rescales each
// sup-F by c(level,1)/c(level,s) so every break count rejects with roughly
// equal probability under the null.  Tabulated critical values exist only
// for ranges starting at one break; the table keys them by the upper bound.
inline TestOutcome double_max(const PanelDataset& data, const ModelSpec& spec,
                              int s_lo, int s_hi, bool weighted,
                              int level_pct = 95,
                              const CriticalValueTable* table = nullptr) {
  if (s_lo < 1 || s_hi < s_lo)
    throw error("double maximum needs 1 <= s_lo <= s_hi");
  const int q = spec.q_eff(data.n_units());

  std::vector<double> stats;
  std::vector<BreakPartition> parts;
  stats.reserve(static_cast<size_t>(s_hi - s_lo + 1));
  for (int s = s_lo; s <= s_hi; ++s) {
    TestOutcome one = sup_f(data, spec, s, nullptr);
    stats.push_back(one.statistic);
    parts.push_back(one.attained);
  }

  TestOutcome out;
  out.supf_by_s = stats;
  const std::string range =
      std::to_string(s_lo) + ".." + std::to_string(s_hi);
  if (spec.vce != Vce::Ssr)
    detail::append_note(out,
                        "robust variance: statistics evaluated at the "
                        "least-squares break dates");

  if (!weighted) {
    out.hypothesis = "UDmax(" + range + ")";
    size_t arg = 0;
    for (size_t i = 1; i < stats.size(); ++i)
      if (stats[i] > stats[arg]) arg = i;
    out.statistic = stats[arg];
    out.max_at_s = s_lo + static_cast<int>(arg);
    out.has_attained = true;
    out.attained = parts[arg];
    if (s_lo == 1)
      detail::attach_criticals(out, table, CvKind::UDmax, q, s_hi,
                               spec.trimming);
    else
      detail::append_note(out, "no tabulated critical values for ranges "
                               "starting above one break");
    return out;
  }

  // Weighted variant: the weights need tabulated sup-F quantiles, and only
  // the three simulated levels are available, so snap the requested level.
  if (table == nullptr)
    throw error("the weighted double maximum needs a critical value table "
                "for its weights");
  int snapped = 95;
  {
    int best_gap = std::numeric_limits<int>::max();
    for (int a : {90, 95, 99}) {
      const int gap = std::abs(level_pct - a);
      if (gap < best_gap || (gap == best_gap && a > snapped)) {
        best_gap = gap;
        snapped = a;
      }
    }
  }
  if (snapped != level_pct)
    detail::append_note(out, "weight level snapped from " +
                                 std::to_string(level_pct) + " to " +
                                 std::to_string(snapped));

  auto supf_quantile = [&](int s, int alpha) {
    const auto e = table->find(CvKind::SupF, q, s, spec.trimming, alpha);
    if (!e)
      throw error("the weighted double maximum needs tabulated sup-F "
                  "critical values for q=" + std::to_string(q) +
                  ", s=1.." + std::to_string(s_hi) +
                  "; regenerate the table with the simulate-cv command");
    return e->value;
  };
  auto weighted_stat = [&](int alpha, size_t* argmax) {
    const double c1 = supf_quantile(1, alpha);
    double m = -std::numeric_limits<double>::infinity();
    size_t arg = 0;
    for (size_t i = 0; i < stats.size(); ++i) {
      const double w = c1 / supf_quantile(s_lo + static_cast<int>(i), alpha);
      const double v = w * stats[i];
      if (v > m) {
        m = v;
        arg = i;
      }
    }
    if (argmax != nullptr) *argmax = arg;
    return m;
  };

  out.hypothesis = "WDmax(" + range + ")";
  size_t arg = 0;
  out.statistic = weighted_stat(snapped, &arg);
  out.max_at_s = s_lo + static_cast<int>(arg);
  out.has_attained = true;
  out.attained = parts[arg];

  if (s_lo != 1) {
    detail::append_note(out, "no tabulated critical values for ranges "
                             "starting above one break");
    return out;
  }
  const auto w90 = table->find(CvKind::WDmax, q, s_hi, spec.trimming, 90);
  const auto w95 = table->find(CvKind::WDmax, q, s_hi, spec.trimming, 95);
  const auto w99 = table->find(CvKind::WDmax, q, s_hi, spec.trimming, 99);
  if (!w90 || !w95 || !w99) {
    detail::append_note(out, "critical values not tabulated for WDmax q=" +
                                 std::to_string(q) + " s=" +
                                 std::to_string(s_hi) +
                                 "; regenerate the table with the "
                                 "simulate-cv command");
    return out;
  }
  // Each level's critical value was simulated with that level's weights, so
  // each rejection decision recomputes the statistic under its own weights;
  // the reported statistic uses the requested level.
  out.has_criticals = true;
  out.c90 = w90->value;
  out.c95 = w95->value;
  out.c99 = w99->value;
  out.reject90 = weighted_stat(90, nullptr) > out.c90;
  out.reject95 = weighted_stat(95, nullptr) > out.c95;
  out.reject99 = weighted_stat(99, nullptr) > out.c99;
  detail::append_note(out, "each level's rejection uses that level's weights");
  return out;
}

// F(s+1|s): estimate the s-break model, then look for one additional break
// inside each regime.  Candidate dates keep both pieces of the split regime
// at least ceil(trimming * regime length) periods long, measured relative to
// the regime rather than the full sample.  The extra break enters only the
// common breaking coefficients; unit-specific augmentation and breaking
// fixed effects stay on the null partition, so the restricted model is
// exactly the s-break model.  s = 0 reduces to the one-break sup-F test.
inline TestOutcome f_next(const PanelDataset& data, const ModelSpec& spec,
                          int s, const CriticalValueTable* table = nullptr) {
  if (s < 0) throw error("f_next needs a break count of at least zero");
  const int N = data.n_units();
  const int q = spec.q_eff(N);
  if (s == 0) {
    TestOutcome out = sup_f(data, spec, 1, table);
    out.hypothesis = "F(1|0)";
    out.max_at_tau = out.attained.breaks().front();
    return out;
  }

  BreakEstimates est = estimate_breaks(data, spec, s);
  const BreakPartition& nullp = est.partition;
  const int T = data.n_periods();
  const std::vector<int> base = nullp.breaks();

  TestOutcome out;
  out.hypothesis =
      "F(" + std::to_string(s + 1) + "|" + std::to_string(s) + ")";
  if (spec.vce != Vce::Ssr)
    detail::append_note(out,
                        "robust variance: the null break dates are "
                        "least-squares estimates");

  double best = -std::numeric_limits<double>::infinity();
  int best_tau = 0;
  std::vector<int> best_alt;
  int evaluated = 0;
  int failed = 0;
  std::string first_failure;

  for (int j = 1; j <= s + 1; ++j) {
    const auto [a, b] = nullp.regime_range(j);
    const int len = b - a + 1;
    const int m = min_segment_length(spec.trimming, len);
    for (int tau = (a - 1) + m; tau <= b - m; ++tau) {
      std::vector<int> alt = base;
      alt.insert(alt.begin() + (j - 1), tau);
      try {
        BreakPartition altp(alt, T);
        RegressionSystem sys = build_design(data, spec, altp,
                                            /*check_trimming=*/false, &nullp);
        FitResult fit = ols(sys, spec.vce, spec.hac_bandwidth);
        Eigen::MatrixXd R = Eigen::MatrixXd::Zero(q, sys.n_cols());
        for (int k = 0; k < q; ++k) {
          R(k, sys.breaking_col(j, k)) = -1.0;
          R(k, sys.breaking_col(j + 1, k)) = 1.0;
        }
        const double f = detail::wald_f(R, fit.coefficients, fit.covariance);
        ++evaluated;
        if (f > best) {
          best = f;
          best_tau = tau;
          best_alt = alt;
        }
      } catch (const error& e) {
        ++failed;
        if (first_failure.empty()) first_failure = e.what();
      }
    }
  }

  if (evaluated == 0) {
    if (failed > 0)
      throw error("F(s+1|s): every candidate split failed: " + first_failure);
    // No regime is long enough to split; the supremum runs over an empty
    // set, so the test cannot reject.
    out.statistic = 0.0;
    out.has_attained = true;
    out.attained = nullp;
    detail::append_note(out, "no admissible split dates under the trimming "
                             "rule; the test cannot reject");
  } else {
    out.statistic = best;
    out.max_at_tau = best_tau;
    out.has_attained = true;
    out.attained = BreakPartition(best_alt, T);
    if (failed > 0)
      detail::append_note(out, std::to_string(failed) +
                                   " candidate split(s) skipped: " +
                                   first_failure);
  }
  detail::attach_criticals(out, table, CvKind::FNext, q, s, spec.trimming);
  return out;
}

// Sequential break-count estimate: accept the first s whose F(s+1|s) test
// fails to reject, up to s_max.
struct SequentialResult {
  int n_breaks = 0;
  int level_pct = 95;
  std::vector<TestOutcome> trace;  // trace[s] is the F(s+1|s) outcome
};

inline SequentialResult sequential_count(const PanelDataset& data,
                                         const ModelSpec& spec, int s_max,
                                         int level_pct,
                                         const CriticalValueTable& table) {
  if (s_max < 1) throw error("sequential test needs s_max >= 1");
  if (level_pct != 90 && level_pct != 95 && level_pct != 99)
    throw error("sequential decisions need a tabulated level: 90, 95, or 99");
  SequentialResult res;
  res.level_pct = level_pct;
  for (int s = 0; s < s_max; ++s) {
    TestOutcome out = f_next(data, spec, s, &table);
    if (!out.has_criticals)
      throw error("cannot run the sequential test: " + out.notes);
    const bool rejected = detail::reject_at(out, level_pct);
    res.trace.push_back(std::move(out));
    if (!rejected) {
      res.n_breaks = s;
      return res;
    }
  }
  res.n_breaks = s_max;
  return res;
}

}  // namespace structbreak
