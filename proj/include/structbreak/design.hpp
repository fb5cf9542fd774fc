#pragma once

// Construction of the stacked regression system for a candidate partition.
//
// Rows are unit-major: row i*T + (t-1) is unit i at period t.  Columns come
// in three blocks, in this order:
//   1. breaking block: q_eff columns per regime (regime-masked copies of the
//      breaking regressors, then observed factors when N = 1, then the
//      breaking constant), regime-major;
//   2. non-breaking block: common-coefficient regressors, observed factors
//      (N = 1), and the common constant;
//   3. unit-specific augmentation blocks (N > 1 only): per unit, the
//      cross-sectional averages and observed factors that enter with
//      unit-specific loadings, regime-interacted for the breaking ones.
//      Such a column is zero on every other unit's rows.
//
// Fixed effects are absorbed by demeaning (per unit, or per unit-regime
// cell for breaking fixed effects) rather than dummy columns; the absorbed
// degrees of freedom are tracked for residual-dof accounting.

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "structbreak/common.hpp"
#include "structbreak/model_spec.hpp"
#include "structbreak/panel_data.hpp"
#include "structbreak/partition.hpp"

namespace structbreak {

struct ColumnInfo {
  std::string name;  // variable name, or "_cons"
  std::string role;  // break | nobreak | kfactor | nbkfactor | constant |
                     // csa_break | csa_nobreak | ufactor | unbfactor
  int regime = 0;    // 1-based regime for regime-interacted columns, else 0
  int unit = -1;     // 0-based unit for unit-specific columns, else -1

  std::string display() const {
    std::string out = name;
    if (role == "csa_break" || role == "csa_nobreak") out = "avg(" + name + ")";
    if (unit >= 0) out += "#unit" + std::to_string(unit + 1);
    if (regime > 0) out += "#regime" + std::to_string(regime);
    return out;
  }
};

struct RegressionSystem {
  Eigen::VectorXd response;
  Eigen::MatrixXd design;
  std::vector<ColumnInfo> column_map;
  BreakPartition partition = BreakPartition::none(1);
  int n_units = 1;
  int n_periods = 0;
  int q_eff = 0;         // breaking columns per regime
  int absorbed_dof = 0;  // degrees of freedom eaten by demeaning
  Deterministic deterministic_applied = Deterministic::None;

  int n_rows() const { return static_cast<int>(design.rows()); }
  int n_cols() const { return static_cast<int>(design.cols()); }
  int n_breaks() const { return partition.n_breaks(); }
  long dof_resid() const {
    return static_cast<long>(n_rows()) - n_cols() - absorbed_dof;
  }
  // Column index of the k-th breaking coefficient (0-based) in regime j
  // (1-based); the breaking block is regime-major and leads the design.
  int breaking_col(int j, int k) const { return (j - 1) * q_eff + k; }
};

// Arithmetic means over units, one series (length T) per requested
// variable, order preserved.  With N = 1 the average is the series itself.
inline std::vector<Eigen::VectorXd> cross_sectional_averages(
    const PanelDataset& data, const std::vector<std::string>& vars) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(vars.size());
  for (const auto& v : vars)
    out.push_back(data.column(v).colwise().mean().transpose());
  return out;
}

namespace detail {

inline void check_finite(const PanelDataset& data, const std::string& var) {
  const Eigen::MatrixXd& m = data.column(var);
  for (int i = 0; i < m.rows(); ++i)
    for (int t = 0; t < m.cols(); ++t)
      if (!std::isfinite(m(i, t)))
        throw error("variable '" + var + "' is not finite for unit " +
                    data.unit_ids()[static_cast<size_t>(i)] + " at time " +
                    data.time_labels()[static_cast<size_t>(t)]);
}

// Copy a common series into stacked rows, optionally masked to one regime.
// series has length T; the destination column spans N*T unit-major rows.
inline void fill_common(Eigen::Ref<Eigen::VectorXd> dst,
                        const Eigen::VectorXd& series,
                        const std::vector<int>& regime_of_t, int regime,
                        int N, int T) {
  dst.setZero();
  for (int i = 0; i < N; ++i)
    for (int t = 0; t < T; ++t)
      if (regime == 0 || regime_of_t[static_cast<size_t>(t)] == regime)
        dst[static_cast<Eigen::Index>(i) * T + t] = series[t];
}

}  // namespace detail

// check_trimming: callers normally require global trimming feasibility; the
// sequential F(s+1|s) scan passes false because its candidate breaks obey
// the regime-relative trimming of the search sets instead.
//
// aug_partition: regime structure for the unit-specific breaking blocks and
// for breaking-fixed-effect demeaning cells, when it must differ from the
// partition driving the common breaking block.  The F(s+1|s) scan passes
// the null partition here: the extra break enters only the tested
// coefficients, so the restricted model is exactly the s-break model.
inline RegressionSystem build_design(const PanelDataset& data,
                                     const ModelSpec& spec,
                                     const BreakPartition& partition,
                                     bool check_trimming = true,
                                     const BreakPartition* aug_partition = nullptr) {
  spec.validate(data);
  const int N = data.n_units();
  const int T = data.n_periods();
  if (partition.T() != T)
    throw error("partition length does not match the dataset");
  if (check_trimming && !partition.feasible(spec.trimming))
    throw error("partition violates the trimming bound: every regime needs "
                "at least " +
                std::to_string(min_segment_length(spec.trimming, T)) +
                " periods");
  const int s = partition.n_breaks();
  const int R = s + 1;
  const BreakPartition& augp = aug_partition ? *aug_partition : partition;
  if (augp.T() != T)
    throw error("augmentation partition length does not match the dataset");
  const int R_aug = augp.n_breaks() + 1;
  const Deterministic det = spec.effective_deterministic(N);
  const int q_eff = spec.q_eff(N);

  detail::check_finite(data, spec.depvar);
  for (const auto& list : {spec.break_vars, spec.nobreak_vars, spec.csa_break,
                           spec.csa_nobreak, spec.kfactors, spec.nbkfactors})
    for (const auto& v : list) detail::check_finite(data, v);

  const std::vector<int> regime_of_t = partition.regime_indicator();
  const std::vector<int> aug_regime_of_t = augp.regime_indicator();

  // Column census.  csa lists are inert when N = 1.
  const bool panel = N > 1;
  const auto& csa_b = spec.csa_break;
  const auto& csa_nb = spec.csa_nobreak;
  const int k_break_unit =
      panel ? static_cast<int>(csa_b.size() + spec.kfactors.size()) : 0;
  const int k_nobreak_unit =
      panel ? static_cast<int>(csa_nb.size() + spec.nbkfactors.size()) : 0;
  const int n_nobreak_common =
      static_cast<int>(spec.nobreak_vars.size()) +
      (panel ? 0 : static_cast<int>(spec.nbkfactors.size())) +
      (det == Deterministic::Constant ? 1 : 0);
  const int cols = q_eff * R + n_nobreak_common +
                   N * (k_nobreak_unit + k_break_unit * R_aug);
  const Eigen::Index rows = static_cast<Eigen::Index>(N) * T;

  // Per-unit parameter budget: each unit contributes T rows and consumes
  // its own augmentation coefficients plus any absorbed unit effects.
  {
    const int per_unit =
        k_nobreak_unit + k_break_unit * R_aug +
        (det == Deterministic::FixedEffects ? 1 : 0) +
        (det == Deterministic::FixedEffectsWithBreaks ? R_aug : 0);
    if (per_unit >= T)
      throw error("each unit has " + std::to_string(T) +
                  " observations but needs " + std::to_string(per_unit) +
                  " unit-specific parameters; reduce augmentation or breaks");
  }

  RegressionSystem sys;
  sys.partition = partition;
  sys.n_units = N;
  sys.n_periods = T;
  sys.q_eff = q_eff;
  sys.deterministic_applied = det;
  sys.response.resize(rows);
  sys.design = Eigen::MatrixXd::Zero(rows, cols);
  sys.column_map.reserve(static_cast<size_t>(cols));

  // Response.
  {
    const Eigen::MatrixXd& y = data.column(spec.depvar);
    for (int i = 0; i < N; ++i)
      for (int t = 0; t < T; ++t)
        sys.response[static_cast<Eigen::Index>(i) * T + t] = y(i, t);
  }

  int c = 0;
  auto stack_column = [&](const std::string& name, const std::string& role,
                          int regime, const Eigen::MatrixXd& values) {
    // values: N x T variable; regime 0 means no mask.
    for (int i = 0; i < N; ++i)
      for (int t = 0; t < T; ++t)
        if (regime == 0 || regime_of_t[static_cast<size_t>(t)] == regime)
          sys.design(static_cast<Eigen::Index>(i) * T + t, c) = values(i, t);
    sys.column_map.push_back({name, role, regime, -1});
    ++c;
  };

  const Eigen::VectorXd ones_T = Eigen::VectorXd::Ones(T);

  // 1. Breaking block, regime-major.
  for (int j = 1; j <= R; ++j) {
    for (const auto& v : spec.break_vars)
      stack_column(v, "break", j, data.column(v));
    if (!panel)
      for (const auto& f : spec.kfactors)
        stack_column(f, "kfactor", j, data.column(f));
    if (det == Deterministic::ConstantWithBreaks) {
      detail::fill_common(sys.design.col(c), ones_T, regime_of_t, j, N, T);
      sys.column_map.push_back({"_cons", "constant", j, -1});
      ++c;
    }
  }

  // 2. Non-breaking block.
  for (const auto& v : spec.nobreak_vars)
    stack_column(v, "nobreak", 0, data.column(v));
  if (!panel)
    for (const auto& f : spec.nbkfactors)
      stack_column(f, "nbkfactor", 0, data.column(f));
  if (det == Deterministic::Constant) {
    detail::fill_common(sys.design.col(c), ones_T, regime_of_t, 0, N, T);
    sys.column_map.push_back({"_cons", "constant", 0, -1});
    ++c;
  }

  // 3. Unit-specific augmentation blocks.
  if (panel && (k_nobreak_unit > 0 || k_break_unit > 0)) {
    const auto avg_b = cross_sectional_averages(data, csa_b);
    const auto avg_nb = cross_sectional_averages(data, csa_nb);
    auto unit_column = [&](int i, const std::string& name,
                           const std::string& role, int regime,
                           const Eigen::VectorXd& series) {
      for (int t = 0; t < T; ++t)
        if (regime == 0 || aug_regime_of_t[static_cast<size_t>(t)] == regime)
          sys.design(static_cast<Eigen::Index>(i) * T + t, c) = series[t];
      sys.column_map.push_back({name, role, regime, i});
      ++c;
    };
    for (int i = 0; i < N; ++i) {
      for (size_t v = 0; v < csa_nb.size(); ++v)
        unit_column(i, csa_nb[v], "csa_nobreak", 0, avg_nb[v]);
      for (const auto& f : spec.nbkfactors)
        unit_column(i, f, "unbfactor", 0,
                    data.column(f).colwise().mean().transpose());
      for (int j = 1; j <= R_aug; ++j) {
        for (size_t v = 0; v < csa_b.size(); ++v)
          unit_column(i, csa_b[v], "csa_break", j, avg_b[v]);
        for (const auto& f : spec.kfactors)
          unit_column(i, f, "ufactor", j,
                      data.column(f).colwise().mean().transpose());
      }
    }
  }

  if (c != cols) throw error("internal: column census mismatch");

  // Within transformations.
  if (det == Deterministic::FixedEffects) {
    for (int i = 0; i < N; ++i) {
      auto rows_i = Eigen::seqN(static_cast<Eigen::Index>(i) * T, T);
      sys.response(rows_i).array() -= sys.response(rows_i).mean();
      for (int col = 0; col < cols; ++col) {
        auto seg = sys.design.col(col)(rows_i);
        seg.array() -= seg.mean();
      }
    }
    sys.absorbed_dof = N;
  } else if (det == Deterministic::FixedEffectsWithBreaks) {
    for (int i = 0; i < N; ++i) {
      for (int j = 1; j <= R_aug; ++j) {
        auto [a, b] = augp.regime_range(j);
        auto rows_ij =
            Eigen::seqN(static_cast<Eigen::Index>(i) * T + (a - 1), b - a + 1);
        sys.response(rows_ij).array() -= sys.response(rows_ij).mean();
        for (int col = 0; col < cols; ++col) {
          auto seg = sys.design.col(col)(rows_ij);
          seg.array() -= seg.mean();
        }
      }
    }
    sys.absorbed_dof = N * R_aug;
  }

  // Rank check: name the columns a rank-revealing QR pushes to the back.
  {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sys.design);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank < cols) {
      const auto& perm = qr.colsPermutation().indices();
      std::string names;
      for (int kk = rank; kk < cols; ++kk) {
        if (!names.empty()) names += ", ";
        names += sys.column_map[static_cast<size_t>(perm[kk])].display();
      }
      throw error("design is rank deficient (rank " + std::to_string(rank) +
                  " of " + std::to_string(cols) +
                  "); collinear columns: " + names);
    }
  }

  return sys;
}

}  // namespace structbreak
