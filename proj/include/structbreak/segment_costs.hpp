#pragma once

// Segment cost tables for break-date search.  cost(a, b) is the minimised
// sum of squared residuals from fitting one regime's coefficients on periods
// a..b (all units pooled).  The dynamic program over partitions only ever
// adds these numbers, which is what makes least-squares break dating
// separable segment by segment.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <cstdint>
#include <limits>
#include <vector>

#include "structbreak/common.hpp"

namespace structbreak {

class SegmentCostTable {
 public:
  SegmentCostTable(int T, int h) : T_(T), h_(h) {
    if (T < 1 || h < 1 || h > T)
      throw error("segment cost table needs 1 <= h <= T");
    const size_t cells = static_cast<size_t>(T) * (T + 1) / 2;
    cost_.assign(cells, std::numeric_limits<double>::quiet_NaN());
    deficient_.assign(cells, 0);
  }

  int T() const { return T_; }
  int h() const { return h_; }

  double cost(int a, int b) const { return cost_[index(a, b)]; }
  bool rank_deficient(int a, int b) const { return deficient_[index(a, b)] != 0; }

  void set(int a, int b, double c, bool deficient = false) {
    const size_t k = index(a, b);
    cost_[k] = c;
    deficient_[k] = deficient ? 1 : 0;
  }

  // Number of admissible segments, i.e. cells with b - a + 1 >= h.
  size_t admissible_cells() const {
    size_t n = 0;
    for (int a = 1; a + h_ - 1 <= T_; ++a) n += static_cast<size_t>(T_ - (a + h_ - 1) + 1);
    return n;
  }

 private:
  size_t index(int a, int b) const {
    if (a < 1 || b > T_ || b - a + 1 < h_)
      throw error("segment (" + std::to_string(a) + "," + std::to_string(b) +
                  ") outside the admissible range (min length " +
                  std::to_string(h_) + ")");
    // row-major triangular layout over b >= a
    const size_t row = static_cast<size_t>(a) - 1;
    return row * static_cast<size_t>(T_) - row * (row - 1) / 2 +
           static_cast<size_t>(b - a);
  }

  int T_;
  int h_;
  std::vector<double> cost_;
  std::vector<std::uint8_t> deficient_;
};

// A pure-change fit problem: within each regime the response obeys
//
//   r_{it} = w_{it}' delta + g_t' b_i + u_{it}
//
// with delta common to all units and b_i unit-specific.  Everything that
// breaks is in here; non-breaking components are handled outside (see
// estimate_breaks) by adjusting the response.  The g series (cross-sectional
// averages, observed factors, a row of ones for breaking unit intercepts)
// take the same values for every unit; only their coefficients differ.
struct PureChangeProblem {
  Eigen::MatrixXd r;               // N x T response
  std::vector<Eigen::MatrixXd> w;  // common-coefficient columns, each N x T
  Eigen::MatrixXd g;               // k x T unit-coefficient series (k may be 0)

  int n_units() const { return static_cast<int>(r.rows()); }
  int n_periods() const { return static_cast<int>(r.cols()); }
};

namespace detail {

// Solve M x = v for symmetric PSD M; falls back to a minimum-norm
// pseudo-inverse solve when M is (near) singular.  Returns true when the
// fallback was needed.
inline bool psd_solve(const Eigen::MatrixXd& M, const Eigen::MatrixXd& V,
                      Eigen::MatrixXd& X) {
  if (M.rows() == 0) {
    X.resize(0, V.cols());
    return false;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  const auto& d = ldlt.vectorD();
  double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d.size(); ++i) {
    dmax = std::max(dmax, std::abs(d[i]));
    dmin = std::min(dmin, d[i]);  // PSD: negatives signal breakdown
  }
  if (ldlt.info() == Eigen::Success && dmax > 0.0 && dmin > dmax * 1e-12) {
    X = ldlt.solve(V);
    return false;
  }
  // Minimum-norm solution via spectral pseudo-inverse.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const auto& ev = es.eigenvalues();
  const double tol = std::max(ev.cwiseAbs().maxCoeff(), 1.0e-300) * 1e-12;
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(ev.size());
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > tol) inv[i] = 1.0 / ev[i];
  X = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose() * V;
  return true;
}

}  // namespace detail

// Fill the full table of segment SSRs for a pure-change problem.  For fixed
// start a the accumulators are extended one period at a time, so the whole
// table costs O(T^2) accumulator updates; each admissible cell then solves a
// small (k + q)-dimensional system via a Schur complement that exploits the
// g series being identical across units.
inline SegmentCostTable segment_costs(const PureChangeProblem& prob, int h) {
  const int N = prob.n_units();
  const int T = prob.n_periods();
  const int q = static_cast<int>(prob.w.size());
  const int k = static_cast<int>(prob.g.rows());
  if (T < 1) throw error("empty problem");
  if (prob.g.size() > 0 && prob.g.cols() != T)
    throw error("g series length mismatch");
  for (const auto& wm : prob.w)
    if (wm.rows() != N || wm.cols() != T)
      throw error("w column dimensions mismatch");

  SegmentCostTable table(T, h);

  // Per-(a) running accumulators.
  Eigen::MatrixXd G(k, k);                    // sum g g'
  std::vector<Eigen::MatrixXd> W(N), B(N);    // q x q and k x q per unit
  std::vector<Eigen::VectorXd> vsum(N), asum(N);
  std::vector<double> Y(N);
  Eigen::VectorXd wt(q), gt(k);

  for (int a = 1; a + h - 1 <= T; ++a) {
    G.setZero();
    for (int i = 0; i < N; ++i) {
      W[i] = Eigen::MatrixXd::Zero(q, q);
      B[i] = Eigen::MatrixXd::Zero(k, q);
      vsum[i] = Eigen::VectorXd::Zero(q);
      asum[i] = Eigen::VectorXd::Zero(k);
      Y[i] = 0.0;
    }
    for (int b = a; b <= T; ++b) {
      const int tc = b - 1;  // 0-based column
      if (k > 0) {
        gt = prob.g.col(tc);
        G.selfadjointView<Eigen::Lower>().rankUpdate(gt, 1.0);
      }
      for (int i = 0; i < N; ++i) {
        for (int c = 0; c < q; ++c) wt[c] = prob.w[static_cast<size_t>(c)](i, tc);
        const double ri = prob.r(i, tc);
        if (q > 0) {
          W[i].selfadjointView<Eigen::Lower>().rankUpdate(wt, 1.0);
          vsum[i] += wt * ri;
        }
        if (k > 0) {
          B[i] += gt * wt.transpose();
          asum[i] += gt * ri;
        }
        Y[i] += ri * ri;
      }
      if (b - a + 1 < h) continue;

      // Assemble the Schur system: project out the unit-specific g
      // coefficients, then solve for the common delta.
      bool deficient = false;
      double ssr = 0.0;
      Eigen::MatrixXd Gfull;
      if (k > 0) Gfull = G.selfadjointView<Eigen::Lower>();
      Eigen::MatrixXd Sw = Eigen::MatrixXd::Zero(q, q);
      Eigen::VectorXd Sv = Eigen::VectorXd::Zero(q);
      for (int i = 0; i < N; ++i) {
        double y_res = Y[i];
        Eigen::MatrixXd Wi = W[i].selfadjointView<Eigen::Lower>();
        Eigen::VectorXd vi = vsum[i];
        if (k > 0) {
          // One PSD solve handles [a_i | B_i].
          Eigen::MatrixXd rhs(k, 1 + q);
          rhs.col(0) = asum[i];
          rhs.rightCols(q) = B[i];
          Eigen::MatrixXd sol;
          deficient |= detail::psd_solve(Gfull, rhs, sol);
          y_res -= asum[i].dot(sol.col(0));
          if (q > 0) {
            vi -= B[i].transpose() * sol.col(0);
            Wi -= B[i].transpose() * sol.rightCols(q);
          }
        }
        ssr += y_res;
        if (q > 0) {
          Sw += Wi;
          Sv += vi;
        }
      }
      if (q > 0) {
        Eigen::MatrixXd delta;
        deficient |= detail::psd_solve(Sw, Sv, delta);
        ssr -= Sv.dot(delta.col(0));
      }
      if (ssr < 0.0) ssr = 0.0;  // guard against cancellation at near-zero SSR
      table.set(a, b, ssr, deficient);
    }
  }
  return table;
}

}  // namespace structbreak
