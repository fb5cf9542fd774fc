#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include <structbreak/dynamic_program.hpp>
#include <structbreak/rng.hpp>
#include <structbreak/segment_costs.hpp>

using namespace structbreak;

namespace {

// Reference SSR of a least-squares fit on one segment, columns = regressors.
double segment_ols_ssr(const Eigen::VectorXd& y, const Eigen::MatrixXd& X) {
  const Eigen::VectorXd beta =
      X.completeOrthogonalDecomposition().solve(y);
  return (y - X * beta).squaredNorm();
}

PureChangeProblem random_problem(int N, int T, int q, std::uint64_t seed) {
  NormalSampler rng(seed);
  PureChangeProblem prob;
  prob.r.resize(N, T);
  for (int i = 0; i < N; ++i)
    for (int t = 0; t < T; ++t) prob.r(i, t) = rng();
  for (int k = 0; k < q; ++k) {
    Eigen::MatrixXd w(N, T);
    for (int i = 0; i < N; ++i)
      for (int t = 0; t < T; ++t) w(i, t) = rng();
    prob.w.push_back(w);
  }
  return prob;
}

}  // namespace

TEST_CASE("segment cost equals per-segment least squares, single unit") {
  const int T = 24;
  auto prob = random_problem(1, T, 2, 17);
  auto costs = segment_costs(prob, 3);
  for (int a = 1; a + 2 <= T; a += 3)
    for (int b = a + 2; b <= T; b += 4) {
      const int len = b - a + 1;
      Eigen::VectorXd y(len);
      Eigen::MatrixXd X(len, 2);
      for (int t = 0; t < len; ++t) {
        y[t] = prob.r(0, a - 1 + t);
        X(t, 0) = prob.w[0](0, a - 1 + t);
        X(t, 1) = prob.w[1](0, a - 1 + t);
      }
      CHECK_THAT(costs.cost(a, b),
                 Catch::Matchers::WithinRel(segment_ols_ssr(y, X), 1e-8) ||
                     Catch::Matchers::WithinAbs(segment_ols_ssr(y, X), 1e-10));
    }
}

TEST_CASE("segment cost matches pooled least squares for panels") {
  // Panel with common breaking slope and unit-specific loadings on a shared
  // series: stack the segment rows of all units and fit jointly.
  const int N = 3, T = 15;
  auto prob = random_problem(N, T, 1, 99);
  NormalSampler rng(7);
  prob.g.resize(2, T);
  for (int t = 0; t < T; ++t) {
    prob.g(0, t) = rng();
    prob.g(1, t) = 1.0;
  }
  auto costs = segment_costs(prob, 4);
  for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 6}, {4, 10}, {9, 15}}) {
    const int len = b - a + 1;
    Eigen::VectorXd y(static_cast<Eigen::Index>(N) * len);
    // Columns: common delta, then per-unit loadings on the two g rows.
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(N) * len, 1 + 2 * N);
    for (int i = 0; i < N; ++i)
      for (int t = 0; t < len; ++t) {
        const Eigen::Index r = static_cast<Eigen::Index>(i) * len + t;
        y[r] = prob.r(i, a - 1 + t);
        X(r, 0) = prob.w[0](i, a - 1 + t);
        X(r, 1 + 2 * i) = prob.g(0, a - 1 + t);
        X(r, 2 + 2 * i) = prob.g(1, a - 1 + t);
      }
    CHECK_THAT(costs.cost(a, b),
               Catch::Matchers::WithinRel(segment_ols_ssr(y, X), 1e-8));
  }
}

TEST_CASE("one-period segments with one regressor fit exactly") {
  auto prob = random_problem(1, 10, 1, 5);
  auto costs = segment_costs(prob, 1);
  for (int a = 1; a <= 10; ++a)
    CHECK_THAT(costs.cost(a, a), Catch::Matchers::WithinAbs(0.0, 1e-12));
}

TEST_CASE("cost table rejects out-of-range and short segments") {
  SegmentCostTable t(10, 3);
  CHECK_THROWS_AS(t.cost(1, 2), error);   // shorter than h
  CHECK_THROWS_AS(t.cost(0, 5), error);   // bad start
  CHECK_THROWS_AS(t.cost(5, 11), error);  // past T
}

TEST_CASE("degenerate segments are flagged and clamped at zero") {
  // Two identical regressors are collinear on every segment.
  PureChangeProblem prob = random_problem(1, 12, 1, 11);
  prob.w.push_back(prob.w[0]);
  auto costs = segment_costs(prob, 2);
  CHECK(costs.rank_deficient(1, 4));
  CHECK(costs.cost(1, 4) >= 0.0);
}

TEST_CASE("dynamic program agrees with exhaustive search") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    const int T = 18 + static_cast<int>(seed) % 5;
    auto prob = random_problem(1, T, 1, 1000 + seed);
    const int h = min_segment_length(0.15, T);
    auto costs = segment_costs(prob, h);
    for (int s = 1; s <= 3; ++s) {
      auto dp = optimal_partition(costs, s, h);
      auto oracle = grid_search_oracle(costs, s, h);
      INFO("seed " << seed << " T " << T << " s " << s);
      CHECK(dp.partition.breaks() == oracle.partition.breaks());
      CHECK_THAT(dp.total, Catch::Matchers::WithinRel(oracle.total, 1e-12) ||
                               Catch::Matchers::WithinAbs(oracle.total, 1e-12));
      // One pass yields the optimum for every smaller count too.
      for (int m = 1; m < s; ++m) {
        auto direct = grid_search_oracle(costs, m, h);
        CHECK(dp.partition_by_breaks[static_cast<size_t>(m)].breaks() ==
              direct.partition.breaks());
      }
    }
  }
}

TEST_CASE("s = 0 returns the whole-sample cost") {
  auto prob = random_problem(1, 16, 1, 42);
  auto costs = segment_costs(prob, 2);
  auto dp = optimal_partition(costs, 0, 2);
  CHECK(dp.partition.n_breaks() == 0);
  CHECK_THAT(dp.total, Catch::Matchers::WithinRel(costs.cost(1, 16), 1e-14));
}

TEST_CASE("a clean step locates its break with zero cost") {
  const int T = 20, k = 7;
  PureChangeProblem prob;
  prob.r = Eigen::MatrixXd::Zero(1, T);
  for (int t = k; t < T; ++t) prob.r(0, t) = 1.0;  // step after period k
  prob.w.push_back(Eigen::MatrixXd::Ones(1, T));
  const int h = min_segment_length(0.15, T);
  auto costs = segment_costs(prob, h);
  auto dp = optimal_partition(costs, 1, h);
  CHECK(dp.partition.breaks() == std::vector<int>{k});
  CHECK_THAT(dp.total, Catch::Matchers::WithinAbs(0.0, 1e-20));
}

TEST_CASE("all-zero data ties break earliest by lexicographic rule") {
  PureChangeProblem prob;
  prob.r = Eigen::MatrixXd::Zero(1, 20);
  prob.w.push_back(Eigen::MatrixXd::Ones(1, 20));
  auto costs = segment_costs(prob, 3);
  auto dp = optimal_partition(costs, 2, 3);
  CHECK(dp.partition.breaks() == std::vector<int>{3, 6});
  auto oracle = grid_search_oracle(costs, 2, 3);
  CHECK(oracle.partition.breaks() == std::vector<int>{3, 6});
}

TEST_CASE("partition counting matches the closed form") {
  // h = 1: number of ways to place s breaks among T-1 cut points.
  CHECK(count_partitions(10, 1, 2) == Catch::Approx(36.0));  // C(9,2)
  CHECK(count_partitions(10, 3, 1) == Catch::Approx(5.0));   // b in 3..7
  CHECK(count_partitions(10, 3, 2) == Catch::Approx(3.0));   // C(3,2)
  CHECK(count_partitions(12, 2, 3) == Catch::Approx(35.0));  // C(7,3)
}

TEST_CASE("oracle refuses absurd enumerations") {
  SegmentCostTable costs(500, 1);
  CHECK_THROWS_AS(grid_search_oracle(costs, 6, 1), error);
}

TEST_CASE("dp validates shape constraints") {
  auto prob = random_problem(1, 12, 1, 3);
  auto costs = segment_costs(prob, 4);
  CHECK_THROWS_AS(optimal_partition(costs, 3, 4), error);  // 4 segments * 4 > 12
  CHECK_THROWS_AS(optimal_partition(costs, 1, 2), error);  // h below table's h
  CHECK_NOTHROW(optimal_partition(costs, 2, 4));
}
