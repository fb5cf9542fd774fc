#pragma once

// OLS fit, residuals, and the pluggable covariance estimators.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "structbreak/common.hpp"
#include "structbreak/design.hpp"
#include "structbreak/model_spec.hpp"
#include "structbreak/segment_costs.hpp"  // detail::psd_solve

namespace structbreak {

struct FitResult {
  Eigen::VectorXd coefficients;  // aligned with system.column_map
  Eigen::VectorXd residuals;
  double ssr = 0.0;
  long dof_resid = 0;
  Eigen::MatrixXd covariance;  // per vce_used
  Vce vce_used = Vce::Ssr;
};

// Newey-West default bandwidth floor(4 * (T/100)^(2/9)).
inline int default_hac_bandwidth(int T) {
  return static_cast<int>(std::floor(4.0 * std::pow(T / 100.0, 2.0 / 9.0)));
}

namespace detail {

inline void rank_check(const Eigen::ColPivHouseholderQR<Eigen::MatrixXd>& qr,
                       const std::vector<ColumnInfo>& column_map) {
  const int cols = static_cast<int>(qr.cols());
  const int rank = static_cast<int>(qr.rank());
  if (rank >= cols) return;
  const auto& perm = qr.colsPermutation().indices();
  std::string names;
  for (int k = rank; k < cols; ++k) {
    if (!names.empty()) names += ", ";
    names += column_map[static_cast<size_t>(perm[k])].display();
  }
  throw error("design is rank deficient (rank " + std::to_string(rank) +
              " of " + std::to_string(cols) + "); collinear columns: " + names);
}

}  // namespace detail

inline Eigen::MatrixXd covariance(const FitResult& fit,
                                  const RegressionSystem& system, Vce vce,
                                  int hac_bandwidth = -1);

inline FitResult ols(const RegressionSystem& system, Vce vce = Vce::Ssr,
                     int hac_bandwidth = -1) {
  const Eigen::MatrixXd& X = system.design;
  if (X.rows() == 0 || X.cols() == 0) throw error("empty design");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  qr.setThreshold(1e-10);
  detail::rank_check(qr, system.column_map);

  FitResult fit;
  fit.coefficients = qr.solve(system.response);
  fit.residuals = system.response - X * fit.coefficients;
  fit.ssr = fit.residuals.squaredNorm();
  fit.dof_resid = system.dof_resid();
  fit.vce_used = vce;
  fit.covariance = covariance(fit, system, vce, hac_bandwidth);
  return fit;
}

inline Eigen::MatrixXd covariance(const FitResult& fit,
                                  const RegressionSystem& system, Vce vce,
                                  int hac_bandwidth) {
  const Eigen::MatrixXd& X = system.design;
  const int C = static_cast<int>(X.cols());
  const int N = system.n_units;
  const int T = system.n_periods;
  Eigen::MatrixXd XtX = Eigen::MatrixXd::Zero(C, C);
  XtX.selfadjointView<Eigen::Lower>().rankUpdate(X.transpose());
  XtX = XtX.selfadjointView<Eigen::Lower>();
  Eigen::MatrixXd XtX_inv;
  detail::psd_solve(XtX, Eigen::MatrixXd::Identity(C, C), XtX_inv);

  switch (vce) {
    case Vce::Ssr: {
      if (fit.dof_resid <= 0)
        throw error("no residual degrees of freedom for the ssr covariance");
      const double sigma2 = fit.ssr / static_cast<double>(fit.dof_resid);
      return sigma2 * XtX_inv;
    }
    case Vce::Hc: {
      // HC0: (X'X)^-1 [sum e_r^2 x_r x_r'] (X'X)^-1
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(C, C);
      for (Eigen::Index r = 0; r < X.rows(); ++r) {
        const double e2 = fit.residuals[r] * fit.residuals[r];
        M.selfadjointView<Eigen::Lower>().rankUpdate(X.row(r).transpose(), e2);
      }
      M = M.selfadjointView<Eigen::Lower>();
      return XtX_inv * M * XtX_inv;
    }
    case Vce::Hac: {
      // Bartlett-kernel Newey-West, serial correlation within units only.
      const int L =
          hac_bandwidth >= 0 ? hac_bandwidth : default_hac_bandwidth(T);
      Eigen::MatrixXd M = Eigen::MatrixXd::Zero(C, C);
      for (int i = 0; i < N; ++i) {
        const Eigen::Index base = static_cast<Eigen::Index>(i) * T;
        // scores s_t = e_t * x_t for this unit
        Eigen::MatrixXd S(T, C);
        for (int t = 0; t < T; ++t)
          S.row(t) = fit.residuals[base + t] * X.row(base + t);
        M.selfadjointView<Eigen::Lower>().rankUpdate(S.transpose(), 1.0);
        for (int l = 1; l <= L; ++l) {
          const double w = 1.0 - static_cast<double>(l) / (L + 1.0);
          for (int t = l; t < T; ++t) {
            const auto a = S.row(t);
            const auto b = S.row(t - l);
            // w * (a'b + b'a)
            M += w * (a.transpose() * b + b.transpose() * a);
          }
        }
      }
      M = M.selfadjointView<Eigen::Lower>();
      return XtX_inv * M * XtX_inv;
    }
    case Vce::Np: {
      // Nonparametric across-unit dispersion of unit-wise estimates of the
      // common coefficients (experimental).  Unit-specific augmentation
      // columns are re-estimated per unit and integrated out; their entries
      // in the returned matrix are zero.
      if (N <= 1) throw error("vce=np requires panel data (N > 1)");
      int n_common = C;
      for (int k = 0; k < C; ++k) {
        if (system.column_map[static_cast<size_t>(k)].unit >= 0) {
          n_common = k;
          break;
        }
      }
      Eigen::MatrixXd theta(N, n_common);
      for (int i = 0; i < N; ++i) {
        // columns relevant to unit i: all common ones plus its own blocks
        std::vector<int> keep;
        for (int k = 0; k < C; ++k) {
          const int u = system.column_map[static_cast<size_t>(k)].unit;
          if (u < 0 || u == i) keep.push_back(k);
        }
        Eigen::MatrixXd Xi(T, static_cast<Eigen::Index>(keep.size()));
        for (size_t k = 0; k < keep.size(); ++k)
          Xi.col(static_cast<Eigen::Index>(k)) =
              X.col(keep[k]).segment(static_cast<Eigen::Index>(i) * T, T);
        Eigen::VectorXd yi =
            system.response.segment(static_cast<Eigen::Index>(i) * T, T);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qri(Xi);
        qri.setThreshold(1e-10);
        if (qri.rank() < Xi.cols())
          throw error("vce=np: unit " + std::to_string(i + 1) +
                      " has a rank-deficient unit-level design");
        Eigen::VectorXd ti = qri.solve(yi);
        theta.row(i) = ti.head(n_common).transpose();
      }
      Eigen::RowVectorXd mean = theta.colwise().mean();
      Eigen::MatrixXd Vc = Eigen::MatrixXd::Zero(n_common, n_common);
      for (int i = 0; i < N; ++i) {
        Eigen::VectorXd d = (theta.row(i) - mean).transpose();
        Vc.selfadjointView<Eigen::Lower>().rankUpdate(d, 1.0);
      }
      Vc = Vc.selfadjointView<Eigen::Lower>();
      Vc /= static_cast<double>(N) * (static_cast<double>(N) - 1.0);
      Eigen::MatrixXd V = Eigen::MatrixXd::Zero(C, C);
      V.topLeftCorner(n_common, n_common) = Vc;
      return V;
    }
  }
  throw error("unknown vce");
}

}  // namespace structbreak
