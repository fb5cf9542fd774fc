#pragma once
// Confidence intervals for estimated break dates, built from the limiting
// argmax distribution of the least-squares break estimator under shifts
// that shrink with the sample.

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "structbreak/design.hpp"
#include "structbreak/ols.hpp"

namespace structbreak {

namespace detail {

// CDF of the argmax of W(v) - |v|/2 over the real line, W a two-sided
// standard Brownian motion.  Symmetric around zero; argmax_cdf(0) = 1/2.
inline double argmax_cdf(double x) {
  if (x < 0.0) return 1.0 - argmax_cdf(-x);
  if (x == 0.0) return 0.5;
  auto Phi = [](double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); };
  const double sx = std::sqrt(x);
  return 1.0 + std::sqrt(x / (2.0 * std::numbers::pi)) * std::exp(-x / 8.0) -
         (x + 5.0) / 2.0 * Phi(-sx / 2.0) + 1.5 * std::exp(x) * Phi(-1.5 * sx);
}

// Upper quantile for p in (0.5, 1) by bisection.  The CDF clears 0.9995
// before 60 and every term stays finite on [0, 60].
inline double argmax_quantile(double p) {
  if (!(p > 0.5 && p < 1.0))
    throw error("argmax quantile needs a probability in (0.5, 1)");
  double lo = 0.0, hi = 60.0;
  for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
    const double mid = 0.5 * (lo + hi);
    (argmax_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

struct BreakInterval {
  int break_index = 0;  // estimated break date, 1-based period position
  int lower = 0;        // interval bounds, clamped to [1, T]
  int upper = 0;
  std::string break_label, lower_label, upper_label;
  double level = 0.95;
  double scale_left = 0.0;  // per-period shift information on each side
  double scale_right = 0.0;
  bool degenerate = false;  // no detectable shift: the interval is [1, T]
  std::string note;
};

namespace detail {

// Moment pair (Q, Omega) of the summed breaking regressors over periods
// t1..t2 (1-based, all units): Q the per-observation second moment, Omega
// the per-observation variance of the score z * e under the chosen
// estimator.  A bartlett bandwidth < 0 means the rule-of-thumb default.
struct MomentPair {
  Eigen::MatrixXd Q, Om;
};

inline MomentPair breaking_moments(const RegressionSystem& sys,
                                   const FitResult& fit, Vce vce, int bw,
                                   const Eigen::MatrixXd& Z, int t1, int t2) {
  const int N = sys.n_units;
  const int T = sys.n_periods;
  const int q = sys.q_eff;
  const int span = t2 - t1 + 1;
  const double cells = static_cast<double>(N) * span;
  MomentPair mp;
  mp.Q = Eigen::MatrixXd::Zero(q, q);
  mp.Om = Eigen::MatrixXd::Zero(q, q);

  for (int i = 0; i < N; ++i)
    for (int t = t1; t <= t2; ++t) {
      const Eigen::Index r = static_cast<Eigen::Index>(i) * T + (t - 1);
      mp.Q.noalias() += Z.row(r).transpose() * Z.row(r);
    }
  mp.Q /= cells;

  switch (vce) {
    case Vce::Ssr: {
      if (fit.dof_resid <= 0)
        throw error("no residual degrees of freedom for the plain variance");
      mp.Om = mp.Q * (fit.ssr / static_cast<double>(fit.dof_resid));
      break;
    }
    case Vce::Hc:
    case Vce::Np: {
      // The unit-dispersion estimator has no score-variance analogue for
      // break dating; fall back to the heteroskedasticity-robust moments.
      for (int i = 0; i < N; ++i)
        for (int t = t1; t <= t2; ++t) {
          const Eigen::Index r = static_cast<Eigen::Index>(i) * T + (t - 1);
          const double e = fit.residuals[r];
          mp.Om.noalias() += (e * e) * Z.row(r).transpose() * Z.row(r);
        }
      mp.Om /= cells;
      break;
    }
    case Vce::Hac: {
      const int bw_eff = bw < 0 ? default_hac_bandwidth(span) : bw;
      Eigen::MatrixXd U(span, q);
      for (int i = 0; i < N; ++i) {
        for (int t = t1; t <= t2; ++t) {
          const Eigen::Index r = static_cast<Eigen::Index>(i) * T + (t - 1);
          U.row(t - t1) = fit.residuals[r] * Z.row(r);
        }
        mp.Om.noalias() += U.transpose() * U;
        for (int l = 1; l <= std::min(bw_eff, span - 1); ++l) {
          const double w = 1.0 - static_cast<double>(l) / (bw_eff + 1.0);
          Eigen::MatrixXd gamma =
              U.topRows(span - l).transpose() * U.bottomRows(span - l);
          mp.Om.noalias() += w * (gamma + gamma.transpose());
        }
      }
      mp.Om /= cells;
      break;
    }
  }
  return mp;
}

}  // namespace detail

// Intervals for every break in the partition.  The default treats the
// regression moments as homogeneous across regimes and yields a symmetric
// interval; regime_specific re-estimates the moments on each side of a
// break, so the two radii can differ.  The per-period information about
// break j is L = N * (d'Qd)^2 / (d'Od), d the coefficient shift across the
// break, and the interval is the date plus/minus ceil(c / L) with c the
// (1+level)/2 quantile of the argmax law.  A shift with d'Qd below 1e-12
// carries no date information: the interval degenerates to the full sample
// and is flagged.
inline std::vector<BreakInterval> break_ci(const PanelDataset& data,
                                           const ModelSpec& spec,
                                           const BreakPartition& partition,
                                           double level = 0.95,
                                           bool regime_specific = false) {
  if (!(level > 0.5 && level < 1.0))
    throw error("confidence level must lie in (0.5, 1)");
  const int s = partition.n_breaks();
  if (s == 0) return {};
  const int N = data.n_units();
  const int T = data.n_periods();
  const int q = spec.q_eff(N);
  if (q < 1)
    throw error("confidence intervals need common breaking coefficients");

  RegressionSystem sys = build_design(data, spec, partition);
  FitResult fit = ols(sys, spec.vce, spec.hac_bandwidth);

  // Sum the regime-masked breaking columns back into full-span series.
  Eigen::MatrixXd Z =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N) * T, q);
  for (int j = 1; j <= s + 1; ++j)
    for (int k = 0; k < q; ++k) Z.col(k) += sys.design.col(sys.breaking_col(j, k));

  const double c = detail::argmax_quantile(0.5 * (1.0 + level));
  const auto& labels = data.time_labels();

  std::vector<BreakInterval> out;
  out.reserve(static_cast<size_t>(s));
  for (int j = 1; j <= s; ++j) {
    BreakInterval ci;
    ci.level = level;
    ci.break_index = partition.breaks()[static_cast<size_t>(j) - 1];
    ci.break_label = labels[static_cast<size_t>(ci.break_index) - 1];

    Eigen::VectorXd delta(q);
    for (int k = 0; k < q; ++k)
      delta[k] = fit.coefficients[sys.breaking_col(j + 1, k)] -
                 fit.coefficients[sys.breaking_col(j, k)];

    auto scale_of = [&](int t1, int t2) {
      const auto mp = detail::breaking_moments(sys, fit, spec.vce,
                                               spec.hac_bandwidth, Z, t1, t2);
      const double signal = delta.dot(mp.Q * delta);
      const double noise = delta.dot(mp.Om * delta);
      if (signal < 1e-12) return 0.0;
      if (noise <= 0.0)
        throw error("degenerate score variance for break " +
                    std::to_string(j));
      return static_cast<double>(N) * signal * signal / noise;
    };

    double l_left, l_right;
    if (regime_specific) {
      const auto [a1, b1] = partition.regime_range(j);
      const auto [a2, b2] = partition.regime_range(j + 1);
      l_left = scale_of(a1, b1);
      l_right = scale_of(a2, b2);
      ci.note = "moments estimated per regime";
    } else {
      l_left = l_right = scale_of(1, T);
    }
    ci.scale_left = l_left;
    ci.scale_right = l_right;

    if (l_left <= 0.0 || l_right <= 0.0) {
      ci.degenerate = true;
      ci.lower = 1;
      ci.upper = T;
      ci.note = "no detectable coefficient shift; interval is the full sample";
    } else {
      ci.lower = std::max(1, ci.break_index -
                                 static_cast<int>(std::ceil(c / l_left)));
      ci.upper = std::min(T, ci.break_index +
                                 static_cast<int>(std::ceil(c / l_right)));
    }
    ci.lower_label = labels[static_cast<size_t>(ci.lower) - 1];
    ci.upper_label = labels[static_cast<size_t>(ci.upper) - 1];
    out.push_back(std::move(ci));
  }
  return out;
}

}  // namespace structbreak
