#pragma once

// Break-date estimation: exact dynamic programming for pure structural
// change, and an iterative scheme for partial change / augmented models:
// fit the full system at the current partition, subtract everything that
// does not break, run the pure-change dynamic program on what remains,
// repeat until the SSR settles.  Each full fit re-minimises jointly, so the
// SSR path is non-increasing.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "structbreak/design.hpp"
#include "structbreak/dynamic_program.hpp"
#include "structbreak/model_spec.hpp"
#include "structbreak/ols.hpp"
#include "structbreak/panel_data.hpp"
#include "structbreak/partition.hpp"
#include "structbreak/segment_costs.hpp"

namespace structbreak {

// Assemble the pure-change problem for the breaking block: common-coefficient
// breaking columns in w, unit-coefficient breaking series in g.  An override
// replaces the response (the iteration passes the adjusted response).
inline PureChangeProblem make_pure_change_problem(
    const PanelDataset& data, const ModelSpec& spec,
    const Eigen::MatrixXd* response_override = nullptr) {
  const int N = data.n_units();
  const int T = data.n_periods();
  const bool panel = N > 1;
  const Deterministic det = spec.effective_deterministic(N);

  PureChangeProblem prob;
  prob.r = response_override ? *response_override : data.column(spec.depvar);
  if (prob.r.rows() != N || prob.r.cols() != T)
    throw error("response override has the wrong shape");

  for (const auto& v : spec.break_vars) prob.w.push_back(data.column(v));
  if (!panel)
    for (const auto& f : spec.kfactors) prob.w.push_back(data.column(f));
  if (det == Deterministic::ConstantWithBreaks)
    prob.w.push_back(Eigen::MatrixXd::Ones(N, T));

  std::vector<Eigen::VectorXd> g_rows;
  if (panel) {
    for (const auto& series : cross_sectional_averages(data, spec.csa_break))
      g_rows.push_back(series);
    for (const auto& f : spec.kfactors)
      g_rows.push_back(data.column(f).colwise().mean().transpose());
    if (det == Deterministic::FixedEffectsWithBreaks)
      g_rows.push_back(Eigen::VectorXd::Ones(T));
  }
  prob.g.resize(static_cast<Eigen::Index>(g_rows.size()), T);
  for (size_t k = 0; k < g_rows.size(); ++k)
    prob.g.row(static_cast<Eigen::Index>(k)) = g_rows[k].transpose();
  return prob;
}

// Spec-level entry point: segment SSR table for a pure-change model.
inline SegmentCostTable segment_costs(const PanelDataset& data,
                                      const ModelSpec& spec) {
  spec.validate(data);
  if (!spec.pure_change(data.n_units()))
    throw error(
        "segment costs require a pure-change specification (no non-breaking "
        "components); partial-change models go through estimate_breaks");
  const int h = min_segment_length(spec.trimming, data.n_periods());
  return segment_costs(make_pure_change_problem(data, spec), h);
}

struct BreakEstimates {
  BreakPartition partition = BreakPartition::none(1);
  RegressionSystem system;  // full design at the final partition
  FitResult fit;            // joint fit at the final partition
  std::vector<double> ssr_path;
  int iterations = 0;
  bool converged = true;
};

namespace detail {

// Sum of coefficient * raw column value over a chosen subset of columns,
// reconstructed from the column map against the original data (the stacked
// design may be demeaned, so it cannot be read back directly).
inline Eigen::MatrixXd raw_contribution(
    const PanelDataset& data, const ModelSpec& spec,
    const RegressionSystem& sys, const Eigen::VectorXd& coef,
    bool breaking_roles, bool nonbreaking_roles) {
  const int N = data.n_units();
  const int T = data.n_periods();
  const std::vector<int> reg = sys.partition.regime_indicator();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(N, T);

  std::vector<Eigen::VectorXd> csa_b, csa_nb;
  if (N > 1) {
    csa_b = cross_sectional_averages(data, spec.csa_break);
    csa_nb = cross_sectional_averages(data, spec.csa_nobreak);
  }
  auto csa_index = [&](const std::vector<std::string>& names,
                       const std::string& v) {
    for (size_t k = 0; k < names.size(); ++k)
      if (names[k] == v) return static_cast<int>(k);
    throw error("internal: csa column '" + v + "' not in spec");
  };

  for (size_t c = 0; c < sys.column_map.size(); ++c) {
    const ColumnInfo& info = sys.column_map[c];
    const bool is_breaking = info.regime > 0;
    if (is_breaking && !breaking_roles) continue;
    if (!is_breaking && !nonbreaking_roles) continue;
    const double b = coef[static_cast<Eigen::Index>(c)];

    auto add_common = [&](auto&& value_at) {
      for (int i = 0; i < N; ++i)
        for (int t = 0; t < T; ++t)
          if (info.regime == 0 || reg[static_cast<size_t>(t)] == info.regime)
            out(i, t) += b * value_at(i, t);
    };
    auto add_unit = [&](const Eigen::VectorXd& series) {
      const int i = info.unit;
      for (int t = 0; t < T; ++t)
        if (info.regime == 0 || reg[static_cast<size_t>(t)] == info.regime)
          out(i, t) += b * series[t];
    };

    if (info.role == "break" || info.role == "nobreak") {
      const Eigen::MatrixXd& m = data.column(info.name);
      add_common([&](int i, int t) { return m(i, t); });
    } else if (info.role == "kfactor" || info.role == "nbkfactor") {
      const Eigen::MatrixXd& m = data.column(info.name);
      add_common([&](int i, int t) { return m(i, t); });
    } else if (info.role == "constant") {
      add_common([&](int, int) { return 1.0; });
    } else if (info.role == "csa_break") {
      add_unit(csa_b[static_cast<size_t>(csa_index(spec.csa_break, info.name))]);
    } else if (info.role == "csa_nobreak") {
      add_unit(
          csa_nb[static_cast<size_t>(csa_index(spec.csa_nobreak, info.name))]);
    } else if (info.role == "ufactor" || info.role == "unbfactor") {
      add_unit(data.column(info.name).colwise().mean().transpose());
    } else {
      throw error("internal: unknown column role '" + info.role + "'");
    }
  }
  return out;
}

}  // namespace detail

inline BreakEstimates estimate_breaks(const PanelDataset& data,
                                      const ModelSpec& spec, int s) {
  spec.validate(data);
  const int N = data.n_units();
  const int T = data.n_periods();
  if (s < 0) throw error("number of breaks must be nonnegative");
  if (s > max_breaks(spec.trimming))
    throw error("s = " + std::to_string(s) + " exceeds max_breaks(" +
                std::to_string(spec.trimming) +
                ") = " + std::to_string(max_breaks(spec.trimming)));
  const int h = min_segment_length(spec.trimming, T);
  if (static_cast<long long>(s + 1) * h > T)
    throw error("sample too short: " + std::to_string(s + 1) +
                " regimes of at least " + std::to_string(h) +
                " periods do not fit in T = " + std::to_string(T));
  const Deterministic det = spec.effective_deterministic(N);
  const bool pure = spec.pure_change(N);

  BreakEstimates est;

  // Initial pass: dynamic program on the raw response, breaking block only.
  {
    PureChangeProblem prob = make_pure_change_problem(data, spec);
    SegmentCostTable costs = segment_costs(prob, h);
    est.partition = optimal_partition(costs, s).partition;
  }

  if (s == 0) {
    // Nothing to search; one joint fit.
    est.system = build_design(data, spec, est.partition);
    est.fit = ols(est.system, spec.vce, spec.hac_bandwidth);
    est.ssr_path = {est.fit.ssr};
    est.iterations = 1;
    return est;
  }

  double prev_ssr = std::numeric_limits<double>::infinity();
  double best_ssr = std::numeric_limits<double>::infinity();
  BreakPartition best = est.partition;
  const int max_iter = pure ? 1 : 100;

  for (int iter = 1; iter <= max_iter; ++iter) {
    est.system = build_design(data, spec, est.partition);
    est.fit = ols(est.system, spec.vce, spec.hac_bandwidth);
    est.ssr_path.push_back(est.fit.ssr);
    est.iterations = iter;
    if (est.fit.ssr < best_ssr) {
      best_ssr = est.fit.ssr;
      best = est.partition;
    }
    if (pure) return est;

    const double change = prev_ssr - est.fit.ssr;
    if (std::isfinite(prev_ssr) &&
        change <= 1e-8 * std::max(prev_ssr, 1e-300)) {
      return est;  // SSR settled (non-increasing by construction)
    }
    prev_ssr = est.fit.ssr;

    // Adjusted response: strip non-breaking contributions and, for plain
    // fixed effects, the recovered unit intercepts.
    Eigen::MatrixXd adj =
        data.column(spec.depvar) -
        detail::raw_contribution(data, spec, est.system, est.fit.coefficients,
                                 /*breaking=*/false, /*nonbreaking=*/true);
    if (det == Deterministic::FixedEffects) {
      const Eigen::MatrixXd breaking =
          detail::raw_contribution(data, spec, est.system,
                                   est.fit.coefficients,
                                   /*breaking=*/true, /*nonbreaking=*/false);
      // alpha_i = mean_t of (y - all estimated contributions) on unit i
      Eigen::VectorXd alpha = (adj - breaking).rowwise().mean();
      adj.colwise() -= alpha;
    }

    PureChangeProblem prob = make_pure_change_problem(data, spec, &adj);
    SegmentCostTable costs = segment_costs(prob, h);
    BreakPartition next = optimal_partition(costs, s).partition;
    if (next == est.partition) return est;
    est.partition = next;
  }

  throw convergence_error(
      "partial-change iteration did not converge in 100 iterations "
      "(best SSR " +
          std::to_string(best_ssr) + ")",
      best.breaks(), est.ssr_path);
}

}  // namespace structbreak
