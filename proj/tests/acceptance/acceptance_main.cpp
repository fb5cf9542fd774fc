// Acceptance gate: one line per criterion, PASS / FAIL / SKIP, with the
// measured quantity printed so a log shows how close each run came.  The
// process exits nonzero when any criterion fails; skipped criteria (missing
// optional datasets) do not fail the gate.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <structbreak/structbreak.hpp>

using namespace structbreak;

namespace {

// Pinned tolerances, one place to read them all.
constexpr double kDpSsrRelTol = 1e-10;       // criterion 1
constexpr double kDpSeconds = 30.0;          // criterion 1
constexpr double kChowTol = 1e-8;            // criterion 2
constexpr double kSizeLo = 0.02;             // criterion 6
constexpr double kSizeHi = 0.09;             // criterion 6
constexpr double kSizeSeconds = 300.0;       // criterion 6
constexpr int kSizeReps = 2000;              // criterion 6
constexpr double kCvSes = 3.0;               // criterion 7
constexpr int kCvReps = 5000;                // criterion 7
constexpr int kCvGrid = 1000;                // criterion 7
constexpr double kCoverLo = 0.90;            // criterion 8
constexpr double kCoverHi = 0.99;            // criterion 8
constexpr int kCoverReps = 1000;             // criterion 8
constexpr double kInvarTol = 1e-8;           // criterion 9
constexpr double kEmpFTol = 0.5;             // criterion 4
constexpr double kEmpSlopeTol = 0.002;       // criterion 4

int g_failures = 0;

void report(int id, const std::string& name, int status,
            const std::string& detail) {
  const char* tag = status == 0 ? "PASS" : (status == 1 ? "FAIL" : "SKIP");
  std::cout << tag << " criterion " << id << " [" << name << "]: " << detail
            << std::endl;
  if (status == 1) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

PanelDataset series_from(const Eigen::MatrixXd& y,
                         std::map<std::string, Eigen::MatrixXd> extra = {}) {
  std::vector<long long> times;
  for (int t = 1; t <= y.cols(); ++t) times.push_back(t);
  extra["y"] = y;
  return PanelDataset({"1"}, times, extra);
}

double segment_ssr(const std::vector<Eigen::VectorXd>& cols,
                   const Eigen::VectorXd& y, int a, int b) {
  const int len = b - a + 1;
  Eigen::MatrixXd Z(len, static_cast<Eigen::Index>(cols.size()));
  for (size_t k = 0; k < cols.size(); ++k)
    Z.col(static_cast<Eigen::Index>(k)) = cols[k].segment(a - 1, len);
  const Eigen::VectorXd ys = y.segment(a - 1, len);
  return (ys - Z * Z.completeOrthogonalDecomposition().solve(ys))
      .squaredNorm();
}

double partition_ssr(const std::vector<Eigen::VectorXd>& cols,
                     const Eigen::VectorXd& y, const std::vector<int>& breaks,
                     int T) {
  BreakPartition p(breaks, T);
  double total = 0.0;
  for (int j = 1; j <= p.n_regimes(); ++j) {
    auto [a, b] = p.regime_range(j);
    total += segment_ssr(cols, y, a, b);
  }
  return total;
}

// Exhaustive best partition with s breaks and minimum segment length h,
// lexicographically smallest breaks among ties.
void enumerate_breaks(int T, int s, int h, std::vector<int>& cur,
                      const std::vector<Eigen::VectorXd>& cols,
                      const Eigen::VectorXd& y, double* best,
                      std::vector<int>* best_breaks) {
  if (static_cast<int>(cur.size()) == s) {
    if (T - cur.back() < h) return;
    const double ssr = partition_ssr(cols, y, cur, T);
    if (ssr < *best - 0.0) {  // strict improvement keeps the first (smallest)
      *best = ssr;
      *best_breaks = cur;
    }
    return;
  }
  const int prev = cur.empty() ? 0 : cur.back();
  for (int b = prev + h; b <= T - h; ++b) {
    cur.push_back(b);
    enumerate_breaks(T, s, h, cur, cols, y, best, best_breaks);
    cur.pop_back();
  }
}

void criterion_1() {
  const auto t0 = std::chrono::steady_clock::now();
  NormalSampler meta(101);
  int checked = 0;
  for (int inst = 0; inst < 200; ++inst) {
    const int T = 25 + (inst * 7) % 16;       // 25..40
    const int q = 1 + (inst % 2);             // 1..2
    const int s = 1 + (inst % 3);             // 1..3
    const double eps = 0.15;
    const int h = min_segment_length(eps, T);
    if ((s + 1) * h > T) continue;

    Eigen::MatrixXd y(1, T);
    std::map<std::string, Eigen::MatrixXd> extra;
    std::vector<Eigen::VectorXd> cols;
    std::vector<std::string> names;
    for (int k = 0; k < q; ++k) {
      Eigen::MatrixXd x(1, T);
      for (int t = 0; t < T; ++t) x(0, t) = meta();
      const std::string nm = "x" + std::to_string(k + 1);
      extra[nm] = x;
      names.push_back(nm);
      cols.push_back(x.row(0).transpose());
    }
    // Regime-varying coefficients over random planted dates.
    std::vector<double> coef(static_cast<size_t>(q) * (s + 1));
    for (auto& c : coef) c = 2.0 * meta();
    for (int t = 0; t < T; ++t) {
      const int regime = std::min(s, (t * (s + 1)) / T);
      double v = 0.4 * meta();
      for (int k = 0; k < q; ++k)
        v += coef[static_cast<size_t>(regime) * q + k] *
             extra[names[static_cast<size_t>(k)]](0, t);
      y(0, t) = v;
    }

    PanelDataset data = series_from(y, extra);
    ModelSpec spec;
    spec.depvar = "y";
    spec.break_vars = names;
    spec.deterministic = Deterministic::None;
    spec.trimming = eps;

    DpResult dp = optimal_partition(segment_costs(data, spec), s);

    double best = std::numeric_limits<double>::infinity();
    std::vector<int> best_breaks, cur;
    enumerate_breaks(T, s, h, cur, cols, y.row(0).transpose(), &best,
                     &best_breaks);

    if (dp.partition.breaks() != best_breaks) {
      report(1, "dynamic program vs exhaustive search", 1,
             "instance " + std::to_string(inst) + ": break dates differ");
      return;
    }
    const double rel = std::abs(dp.total - best) /
                       std::max(1e-300, std::abs(best));
    if (rel > kDpSsrRelTol) {
      report(1, "dynamic program vs exhaustive search", 1,
             "instance " + std::to_string(inst) + ": SSR gap " +
                 std::to_string(rel));
      return;
    }
    ++checked;
  }
  const double el = seconds_since(t0);
  if (el >= kDpSeconds) {
    report(1, "dynamic program vs exhaustive search", 1,
           "took " + std::to_string(el) + " s (budget " +
               std::to_string(kDpSeconds) + ")");
    return;
  }
  std::ostringstream d;
  d << checked << " instances match exactly, " << std::fixed
    << std::setprecision(1) << el << " s";
  report(1, "dynamic program vs exhaustive search", 0, d.str());
}

void criterion_2() {
  NormalSampler meta(202);
  double worst = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    const int T = 30 + (inst % 31);  // 30..60
    const int s = 1 + (inst % 2);
    Eigen::MatrixXd x(1, T), y(1, T);
    for (int t = 0; t < T; ++t) {
      x(0, t) = meta();
      y(0, t) = meta() + 0.5 * x(0, t);
    }
    PanelDataset data = series_from(y, {{"x", x}});
    ModelSpec spec;
    spec.depvar = "y";
    spec.break_vars = {"x"};
    spec.deterministic = Deterministic::ConstantWithBreaks;
    const int q = 2;

    std::vector<int> breaks;
    for (int j = 1; j <= s; ++j) breaks.push_back(j * T / (s + 1));
    BreakPartition part(breaks, T);

    TestOutcome out = chow_f(data, spec, part);

    const Eigen::VectorXd yv = y.row(0).transpose();
    const std::vector<Eigen::VectorXd> cols{x.row(0).transpose(),
                                            Eigen::VectorXd::Ones(T)};
    const double ssr_u = partition_ssr(cols, yv, breaks, T);
    const double ssr_r = segment_ssr(cols, yv, 1, T);
    const double dof = T - static_cast<double>(q) * (s + 1);
    const double f_classic =
        ((ssr_r - ssr_u) / (static_cast<double>(s) * q)) / (ssr_u / dof);
    const double gap =
        std::abs(out.statistic - f_classic) / std::max(1.0, f_classic);
    worst = std::max(worst, gap);
  }
  if (worst <= kChowTol)
    report(2, "known-dates test vs classical F ratio", 0,
           "50 instances, worst relative gap " + std::to_string(worst));
  else
    report(2, "known-dates test vs classical F ratio", 1,
           "worst relative gap " + std::to_string(worst));
}

void criterion_3() {
  const bool ok =
      max_breaks(0.15) == 5 && max_breaks(0.10) == 8 && max_breaks(0.05) == 18;
  std::ostringstream d;
  d << "max breaks at trimming 0.15/0.10/0.05 = " << max_breaks(0.15) << "/"
    << max_breaks(0.10) << "/" << max_breaks(0.05) << " (want 5/8/18)";
  report(3, "admissible break-count bound", ok ? 0 : 1, d.str());
}

std::optional<CriticalValueTable> shipped_table(std::string* why) {
  const std::string path = "data/critical_values.tsv";
  try {
    return CriticalValueTable::load(path);
  } catch (const std::exception& e) {
    *why = e.what();
    return std::nullopt;
  }
}

void criterion_4() {
  const std::string path = "data/covid_us.csv";
  if (!std::filesystem::exists(path)) {
    report(4, "weekly national series", 2,
           path + " not present (source data not retrievable in this "
                  "environment); criteria 1-3 and 6-9 govern");
    return;
  }
  try {
    auto data = load_csv(path, CsvRoles{"", "week"});
    ModelSpec spec;
    spec.depvar = "deaths";
    spec.break_vars = {"cases_lag4"};
    spec.deterministic = Deterministic::ConstantWithBreaks;
    spec.trimming = 0.15;
    std::string why;
    auto table = shipped_table(&why);
    if (!table) {
      report(4, "weekly national series", 1, "no critical-value table: " + why);
      return;
    }
    SequentialResult seq = sequential_count(data, spec, 5, 95, *table);
    if (seq.n_breaks != 2) {
      report(4, "weekly national series", 1,
             "selected " + std::to_string(seq.n_breaks) + " breaks, want 2");
      return;
    }
    BreakEstimates est = estimate_breaks(data, spec, 2);
    const auto& labels = data.time_labels();
    std::vector<std::string> got;
    for (int b : est.partition.breaks())
      got.push_back(labels[static_cast<size_t>(b) - 1]);
    if (got != std::vector<std::string>{"2020w20", "2021w11"}) {
      report(4, "weekly national series", 1,
             "breaks at " + got[0] + ", " + got[1] +
                 " (want 2020w20, 2021w11)");
      return;
    }
    TestOutcome chow = chow_f(data, spec, est.partition);
    if (std::abs(chow.statistic - 134.7) > kEmpFTol) {
      report(4, "weekly national series", 1,
             "known-breaks F " + std::to_string(chow.statistic) +
                 " (want 134.7 within 0.5)");
      return;
    }
    const double want_slope[3] = {0.059, 0.014, 0.006};
    for (int j = 1; j <= 3; ++j) {
      const double got_slope =
          est.fit.coefficients[est.system.breaking_col(j, 0)];
      if (std::abs(got_slope - want_slope[j - 1]) > kEmpSlopeTol) {
        report(4, "weekly national series", 1,
               "regime " + std::to_string(j) + " slope " +
                   std::to_string(got_slope));
        return;
      }
    }
    report(4, "weekly national series", 0,
           "2 breaks at 2020w20, 2021w11; F and slopes within tolerance");
  } catch (const std::exception& e) {
    report(4, "weekly national series", 1, e.what());
  }
}

void criterion_5() {
  const std::string path = "data/covid_panel.csv";
  if (!std::filesystem::exists(path)) {
    report(5, "state panel with averages", 2,
           path + " not present (source data not retrievable in this "
                  "environment); criteria 1-3 and 6-9 govern");
    return;
  }
  try {
    auto data = load_csv(path, CsvRoles{"state", "week"});
    ModelSpec spec;
    spec.depvar = "deaths";
    spec.break_vars = {"cases_lag4"};
    spec.csa_break = {"cases_lag4"};
    spec.deterministic = Deterministic::FixedEffects;
    spec.trimming = 0.10;
    std::string why;
    auto table = shipped_table(&why);
    if (!table) {
      report(5, "state panel with averages", 1,
             "no critical-value table: " + why);
      return;
    }
    SequentialResult seq = sequential_count(data, spec, 8, 95, *table);
    if (seq.n_breaks != 3) {
      report(5, "state panel with averages", 1,
             "selected " + std::to_string(seq.n_breaks) + " breaks, want 3");
      return;
    }
    BreakEstimates est = estimate_breaks(data, spec, 3);
    const auto& labels = data.time_labels();
    std::vector<std::string> got;
    for (int b : est.partition.breaks())
      got.push_back(labels[static_cast<size_t>(b) - 1]);
    const std::vector<std::string> want{"2020w19", "2020w51", "2021w9"};
    if (got != want) {
      std::string s;
      for (const auto& g : got) s += g + " ";
      report(5, "state panel with averages", 1, "breaks at " + s);
      return;
    }
    report(5, "state panel with averages", 0,
           "3 breaks at 2020w19, 2020w51, 2021w9");
  } catch (const std::exception& e) {
    report(5, "state panel with averages", 1, e.what());
  }
}

void criterion_6() {
  std::string why;
  auto table = shipped_table(&why);
  if (!table) {
    report(6, "finite-sample size of sup-F", 1,
           "no critical-value table: " + why);
    return;
  }
  const auto e = table->find(CvKind::SupF, 1, 1, 0.15, 95);
  if (!e) {
    report(6, "finite-sample size of sup-F", 1,
           "table lacks the supF q=1 s=1 entry");
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const int T = 200;
  ModelSpec spec;
  spec.depvar = "y";
  spec.deterministic = Deterministic::ConstantWithBreaks;
  int rejections = 0;
  for (int rep = 0; rep < kSizeReps; ++rep) {
    NormalSampler rng(mix_seed(606060, static_cast<std::uint64_t>(rep)));
    Eigen::MatrixXd y(1, T);
    for (int t = 0; t < T; ++t) y(0, t) = rng();
    PanelDataset data = series_from(y);
    TestOutcome out = sup_f(data, spec, 1, &*table);
    if (out.reject95) ++rejections;
  }
  const double rate = static_cast<double>(rejections) / kSizeReps;
  const double el = seconds_since(t0);
  std::ostringstream d;
  d << "rejection rate " << std::fixed << std::setprecision(4) << rate
    << " at nominal 0.05 (" << kSizeReps << " replications, "
    << std::setprecision(1) << el << " s)";
  const bool ok = rate >= kSizeLo && rate <= kSizeHi && el < kSizeSeconds;
  report(6, "finite-sample size of sup-F", ok ? 0 : 1, d.str());
}

void criterion_7() {
  std::string why;
  auto table = shipped_table(&why);
  if (!table) {
    report(7, "critical-value table fidelity", 1,
           "no critical-value table: " + why);
    return;
  }
  // Collect the shipped supF entries with q <= 3 at 15% trimming.
  std::map<int, int> smax_of_q;
  for (const auto& [key, e] : table->entries()) {
    if (key.kind != CvKind::SupF || key.q > 3 || key.eps_pct != 15) continue;
    smax_of_q[key.q] = std::max(smax_of_q[key.q], key.s);
  }
  if (smax_of_q.empty()) {
    report(7, "critical-value table fidelity", 1,
           "table has no supF entries for q <= 3 at 15% trimming");
    return;
  }
  const auto t0 = std::chrono::steady_clock::now();
  int cells = 0;
  double worst_z = 0.0;
  std::string worst_at;
  for (const auto& [q, smax] : smax_of_q) {
    auto rows = simulate_cv_batch(q, 0.15, smax, kCvReps, kCvGrid,
                                  /*seed=*/913 + static_cast<std::uint64_t>(q));
    for (const auto& fresh : rows) {
      if (fresh.key.kind != CvKind::SupF) continue;
      const auto ship = table->find(CvKind::SupF, q, fresh.key.s, 0.15,
                                    fresh.key.alpha_pct);
      if (!ship) continue;
      const double se =
          std::sqrt(ship->se * ship->se + fresh.se * fresh.se);
      const double z = std::abs(ship->value - fresh.value) /
                       std::max(1e-12, se);
      ++cells;
      if (z > worst_z) {
        worst_z = z;
        worst_at = "q=" + std::to_string(q) + " s=" +
                   std::to_string(fresh.key.s) + " level " +
                   std::to_string(fresh.key.alpha_pct);
      }
    }
  }
  const double el = seconds_since(t0);
  std::ostringstream d;
  d << cells << " cells, worst |z| " << std::fixed << std::setprecision(2)
    << worst_z << " (at " << worst_at << ", combined-SE units, "
    << std::setprecision(1) << el << " s)";
  report(7, "critical-value table fidelity", worst_z <= kCvSes ? 0 : 1,
         d.str());
}

void criterion_8() {
  const int T = 200;
  const int true_break = 100;
  ModelSpec spec;
  spec.depvar = "y";
  spec.deterministic = Deterministic::ConstantWithBreaks;
  int covered = 0;
  int degenerate = 0;
  for (int rep = 0; rep < kCoverReps; ++rep) {
    NormalSampler rng(mix_seed(808080, static_cast<std::uint64_t>(rep)));
    Eigen::MatrixXd y(1, T);
    for (int t = 0; t < T; ++t)
      y(0, t) = (t >= true_break ? 1.0 : 0.0) + rng();
    PanelDataset data = series_from(y);
    BreakEstimates est = estimate_breaks(data, spec, 1);
    auto cis = break_ci(data, spec, est.partition, 0.95, false);
    if (cis.size() != 1) continue;
    if (cis[0].degenerate) ++degenerate;
    if (cis[0].lower <= true_break && true_break <= cis[0].upper) ++covered;
  }
  const double rate = static_cast<double>(covered) / kCoverReps;
  std::ostringstream d;
  d << "95% interval covers the planted date in " << std::fixed
    << std::setprecision(4) << rate << " of " << kCoverReps
    << " replications";
  if (degenerate > 0) d << " (" << degenerate << " degenerate)";
  report(8, "break-date interval coverage", (rate >= kCoverLo && rate <= kCoverHi) ? 0 : 1,
         d.str());
}

void criterion_9() {
  NormalSampler meta(909);
  double worst = 0.0;
  bool breaks_ok = true;
  for (int inst = 0; inst < 20; ++inst) {
    const int T = 40 + (inst % 5) * 10;
    Eigen::MatrixXd x(1, T), y(1, T);
    for (int t = 0; t < T; ++t) {
      x(0, t) = meta();
      const int regime = t * 2 / T;
      y(0, t) = (regime == 0 ? 0.5 : -0.8) +
                (regime == 0 ? 1.0 : 0.2) * x(0, t) + 0.6 * meta();
    }
    Eigen::MatrixXd y2 = (7.3 * y.array() - 4.0).matrix();
    PanelDataset d1 = series_from(y, {{"x", x}});
    PanelDataset d2 = series_from(y2, {{"x", x}});
    ModelSpec spec;
    spec.depvar = "y";
    spec.break_vars = {"x"};
    spec.deterministic = Deterministic::ConstantWithBreaks;

    auto rel = [](double a, double b) {
      return std::abs(a - b) / std::max(1.0, std::abs(a));
    };
    auto e1 = estimate_breaks(d1, spec, 1);
    auto e2 = estimate_breaks(d2, spec, 1);
    if (e1.partition.breaks() != e2.partition.breaks()) breaks_ok = false;
    worst = std::max(worst, rel(sup_f(d1, spec, 1).statistic,
                                sup_f(d2, spec, 1).statistic));
    worst = std::max(worst, rel(sup_f(d1, spec, 2).statistic,
                                sup_f(d2, spec, 2).statistic));
    worst = std::max(worst, rel(f_next(d1, spec, 1).statistic,
                                f_next(d2, spec, 1).statistic));
  }
  std::ostringstream d;
  d << "20 instances; breaks " << (breaks_ok ? "identical" : "DIFFER")
    << ", worst statistic gap " << std::scientific << std::setprecision(2)
    << worst << " under y -> 7.3*y - 4";
  report(9, "scale and shift invariance", (breaks_ok && worst <= kInvarTol) ? 0 : 1,
         d.str());
}

}  // namespace

int main() {
  std::cout << "structbreak acceptance gate\n";
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  if (g_failures == 0) {
    std::cout << "acceptance: all criteria passed or were skipped"
              << std::endl;
    return 0;
  }
  std::cout << "acceptance: " << g_failures << " criterion(s) failed"
            << std::endl;
  return 1;
}
