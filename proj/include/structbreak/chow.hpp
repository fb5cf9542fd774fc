#pragma once

// Known-breaks Chow test: Wald statistic for equality of the breaking
// coefficients across all regimes, scaled to F form, with the selected
// covariance estimator plugged into the middle.

#include <Eigen/Dense>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "structbreak/design.hpp"
#include "structbreak/model_spec.hpp"
#include "structbreak/ols.hpp"
#include "structbreak/panel_data.hpp"
#include "structbreak/partition.hpp"

namespace structbreak {

struct TestOutcome {
  std::string hypothesis;  // e.g. "chow(2)", "supF(2)", "UDmax(1..5)", "F(3|2)"
  double statistic = std::numeric_limits<double>::quiet_NaN();

  bool has_criticals = false;
  double c90 = 0.0, c95 = 0.0, c99 = 0.0;
  bool reject90 = false, reject95 = false, reject99 = false;

  bool has_p = false;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  long df_num = 0, df_den = 0;
  // The source text quotes s numerator degrees of freedom where the
  // restriction count is s*q_eff; both are reported so results can be
  // compared under either convention.
  long df_num_stated = 0;
  double p_value_stated = std::numeric_limits<double>::quiet_NaN();

  bool has_attained = false;
  BreakPartition attained = BreakPartition::none(1);

  // double_max: the per-s sup-F values and the maximizing s.
  std::vector<double> supf_by_s;
  int max_at_s = 0;
  // f_next: the maximizing extra break position.
  int max_at_tau = 0;

  std::string notes;

  void set_criticals(double v90, double v95, double v99) {
    has_criticals = true;
    c90 = v90;
    c95 = v95;
    c99 = v99;
    reject90 = statistic > c90;
    reject95 = statistic > c95;
    reject99 = statistic > c99;
  }
};

namespace detail {

// Wald quadratic form for R theta = 0 divided by the number of restrictions.
// A restriction satisfied to rounding error yields statistic 0: under an
// exact fit both R theta and V collapse to roundoff and their quotient is
// noise, so the scale test below decides instead of the pseudo-inverse.
inline double wald_f(const Eigen::MatrixXd& R, const Eigen::VectorXd& theta,
                     const Eigen::MatrixXd& V) {
  const Eigen::VectorXd r = R * theta;
  const double scale = R.cwiseAbs().rowwise().sum().maxCoeff() *
                       (1.0 + theta.cwiseAbs().maxCoeff());
  if (r.cwiseAbs().maxCoeff() <= 1e-10 * scale) return 0.0;
  const Eigen::MatrixXd mid = R * V * R.transpose();
  Eigen::MatrixXd sol;
  psd_solve(mid, Eigen::MatrixXd(r), sol);
  const double wald = r.dot(sol.col(0));
  const double f = wald / static_cast<double>(R.rows());
  return f < 0.0 ? 0.0 : f;
}

// Restriction matrix for "breaking coefficients equal across consecutive
// regimes" on the system's regime-major breaking block.
inline Eigen::MatrixXd break_equality_restrictions(const RegressionSystem& sys) {
  const int s = sys.n_breaks();
  const int q = sys.q_eff;
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(s) * q,
                                            sys.n_cols());
  for (int j = 1; j <= s; ++j)
    for (int k = 0; k < q; ++k) {
      R(static_cast<Eigen::Index>(j - 1) * q + k, sys.breaking_col(j, k)) = -1.0;
      R(static_cast<Eigen::Index>(j - 1) * q + k, sys.breaking_col(j + 1, k)) = 1.0;
    }
  return R;
}

}  // namespace detail

inline TestOutcome chow_f(const PanelDataset& data, const ModelSpec& spec,
                          const BreakPartition& partition) {
  const int s = partition.n_breaks();
  if (s < 1) throw error("chow test needs at least one break");
  const int q = spec.q_eff(data.n_units());
  if (q < 1)
    throw error(
        "no testable breaking coefficients: the breaking block is empty "
        "(unit-level intercept shifts alone cannot be Chow-tested)");

  RegressionSystem sys = build_design(data, spec, partition);
  FitResult fit = ols(sys, spec.vce, spec.hac_bandwidth);

  const Eigen::MatrixXd R = detail::break_equality_restrictions(sys);
  TestOutcome out;
  out.hypothesis = "chow(" + std::to_string(s) + ")";
  out.statistic = detail::wald_f(R, fit.coefficients, fit.covariance);
  out.df_num = static_cast<long>(s) * q;
  out.df_den = fit.dof_resid;
  out.df_num_stated = s;
  out.has_attained = true;
  out.attained = partition;
  if (out.df_den > 0) {
    boost::math::fisher_f dist(static_cast<double>(out.df_num),
                               static_cast<double>(out.df_den));
    out.has_p = true;
    out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
    out.set_criticals(boost::math::quantile(dist, 0.90),
                      boost::math::quantile(dist, 0.95),
                      boost::math::quantile(dist, 0.99));
    boost::math::fisher_f stated(static_cast<double>(out.df_num_stated),
                                 static_cast<double>(out.df_den));
    out.p_value_stated =
        boost::math::cdf(boost::math::complement(stated, out.statistic));
  }
  if (spec.vce == Vce::Np)
    out.notes = "vce=np is experimental (unit-dispersion estimator)";
  return out;
}

// SSR of the model at a given partition; s = 0 gives the no-break fit.
inline double ssr_given_breaks(const PanelDataset& data, const ModelSpec& spec,
                               const BreakPartition& partition) {
  return ols(build_design(data, spec, partition)).ssr;
}

}  // namespace structbreak
