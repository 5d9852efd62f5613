#include "fofdoe/optimizer.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace fofdoe {
namespace {

DesignProblem one_factor_problem(int n_runs, BasisSpec factor, BasisSpec coeff,
                                 Criterion criterion = Criterion::A) {
  DesignProblem problem;
  problem.n_runs = n_runs;
  problem.factors = {{factor, coeff}};
  problem.criterion = criterion;
  return problem;
}

// Exhaustive search over every grid assignment of the free coordinates.
double exhaustive_grid_optimum(const DesignProblem& problem, int levels_count) {
  const BlockLayout layout = block_layout(problem);
  const Eigen::MatrixXd j = assemble_J(problem);
  const int free_coords = problem.n_runs * (layout.gamma_cols - 1);
  std::vector<double> levels(levels_count);
  for (int i = 0; i < levels_count; ++i)
    levels[i] = -problem.bound + 2.0 * problem.bound * i / (levels_count - 1);

  std::vector<int> odometer(free_coords, 0);
  Eigen::MatrixXd block(problem.n_runs, layout.gamma_cols - 1);
  double best = std::numeric_limits<double>::infinity();
  for (;;) {
    for (int c = 0; c < free_coords; ++c)
      block(c / (layout.gamma_cols - 1), c % (layout.gamma_cols - 1)) =
          levels[odometer[c]];
    best = std::min(best, criterion_value(problem, make_design(problem, block), j));
    int pos = 0;
    while (pos < free_coords && ++odometer[pos] == levels_count)
      odometer[pos++] = 0;
    if (pos == free_coords) break;
  }
  return best;
}

TEST(RandomDesign, SupportAndDeterminism) {
  const DesignProblem problem =
      one_factor_problem(12, BasisSpec::bspline(0, 5), BasisSpec::bspline(0, 3));
  std::mt19937_64 rng_a(42), rng_b(42);
  const Design a = random_design(problem, rng_a);
  const Design b = random_design(problem, rng_b);
  EXPECT_TRUE(a.gamma == b.gamma);
  EXPECT_TRUE((a.gamma.col(0).array() == 1.0).all());
  EXPECT_LE(a.gamma.rightCols(4).cwiseAbs().maxCoeff(), 1.0);
}

TEST(RandomDesign, EntriesCenteredAtZero) {
  const DesignProblem problem =
      one_factor_problem(10, BasisSpec::bspline(0, 5), BasisSpec::bspline(0, 3));
  std::mt19937_64 rng(1);
  double sum = 0.0;
  int count = 0;
  for (int draw = 0; draw < 250; ++draw) {
    const Design design = random_design(problem, rng);
    sum += design.gamma.rightCols(4).sum();
    count += 40;
  }
  EXPECT_EQ(count, 10000);
  EXPECT_NEAR(sum / count, 0.0, 0.02);
}

TEST(CoordinateExchange, FindsTableOneNestedOptimum) {
  const DesignProblem problem =
      one_factor_problem(12, BasisSpec::bspline(0, 3), BasisSpec::bspline(0, 3));
  ExchangeConfig config;
  config.random_starts = 100;
  config.seed = 7;
  const SearchResult result = coordinate_exchange(problem, config);
  ASSERT_FALSE(result.all_infeasible);
  EXPECT_NEAR(result.best_value, 0.75, 0.0075);
  EXPECT_EQ(result.best_value,
            *std::min_element(result.per_start_values.begin(),
                              result.per_start_values.end()));
  EXPECT_EQ(static_cast<int>(result.per_start_values.size()), 100);
}

TEST(CoordinateExchange, BoxSaturationAtOptimum) {
  const DesignProblem problem =
      one_factor_problem(12, BasisSpec::bspline(0, 3), BasisSpec::bspline(0, 3));
  ExchangeConfig config;
  config.random_starts = 200;
  config.seed = 3;
  const SearchResult result = coordinate_exchange(problem, config);
  // at the optimum every factor coefficient sits on the box boundary
  EXPECT_TRUE(
      (result.best_design.gamma.rightCols(2).cwiseAbs().array() == 1.0).all());
}

TEST(CoordinateExchange, MatchesExhaustiveGridOnTinyProblem) {
  const DesignProblem problem =
      one_factor_problem(2, BasisSpec::bspline(0, 2), BasisSpec::bspline(0, 2));
  ExchangeConfig config;
  config.random_starts = 50;
  config.candidate_levels = 5;
  config.seed = 13;
  const SearchResult result = coordinate_exchange(problem, config);
  const double oracle = exhaustive_grid_optimum(problem, 5);
  EXPECT_EQ(result.best_value, oracle);
}

TEST(CoordinateExchange, DeterministicAcrossThreadCounts) {
  const DesignProblem problem =
      one_factor_problem(12, BasisSpec::bspline(0, 5), BasisSpec::bspline(0, 3));
  ExchangeConfig config;
  config.random_starts = 8;
  config.seed = 99;
  config.threads = 1;
  const SearchResult serial = coordinate_exchange(problem, config);
  config.threads = 4;
  const SearchResult parallel = coordinate_exchange(problem, config);
  EXPECT_EQ(serial.best_start, parallel.best_start);
  EXPECT_EQ(serial.best_value, parallel.best_value);
  EXPECT_TRUE(serial.best_design.gamma == parallel.best_design.gamma);
  EXPECT_EQ(serial.per_start_values, parallel.per_start_values);
  EXPECT_EQ(serial.passes_used, parallel.passes_used);
}

TEST(CoordinateExchange, MonotoneAcceptedTrace) {
  const DesignProblem problem =
      one_factor_problem(12, BasisSpec::bspline(0, 9), BasisSpec::bspline(0, 5));
  ExchangeConfig config;
  config.random_starts = 4;
  config.seed = 5;
  config.record_traces = true;
  const SearchResult result = coordinate_exchange(problem, config);
  ASSERT_EQ(result.traces.size(), 4u);
  for (const std::vector<double>& trace : result.traces) {
    ASSERT_FALSE(trace.empty());
    for (std::size_t i = 1; i < trace.size(); ++i)
      EXPECT_LT(trace[i], trace[i - 1]);
  }
}

TEST(CoordinateExchange, RefinePolishesAtLeastAsWell) {
  const DesignProblem problem =
      one_factor_problem(12, BasisSpec::bspline(0, 5), BasisSpec::bspline(0, 5));
  ExchangeConfig config;
  config.random_starts = 20;
  config.seed = 31;
  const SearchResult plain = coordinate_exchange(problem, config);
  config.refine = true;
  const SearchResult refined = coordinate_exchange(problem, config);
  EXPECT_LE(refined.best_value, plain.best_value + 1e-12);
}

TEST(CoordinateExchange, InfeasibleProblemThrowsBeforeSearch) {
  const DesignProblem problem =
      one_factor_problem(12, BasisSpec::bspline(0, 3), BasisSpec::bspline(0, 9));
  EXPECT_THROW(coordinate_exchange(problem, ExchangeConfig{}), infeasible_error);
}

TEST(CoordinateExchange, AllStartsInfeasibleReported) {
  // a vanishing box makes the factor block numerically singular at the
  // reciprocal-condition threshold, so no random start is feasible
  DesignProblem problem =
      one_factor_problem(12, BasisSpec::bspline(0, 3), BasisSpec::bspline(0, 3));
  problem.bound = 1e-8;
  ExchangeConfig config;
  config.random_starts = 3;
  const SearchResult result = coordinate_exchange(problem, config);
  EXPECT_TRUE(result.all_infeasible);
  EXPECT_TRUE(std::isinf(result.best_value));
  EXPECT_EQ(result.best_start, -1);
}

TEST(CoordinateExchange, ConfigValidation) {
  const DesignProblem problem =
      one_factor_problem(12, BasisSpec::bspline(0, 3), BasisSpec::bspline(0, 3));
  ExchangeConfig config;
  config.random_starts = 0;
  EXPECT_THROW(coordinate_exchange(problem, config), std::invalid_argument);
  config.random_starts = 1;
  config.candidate_levels = 1;
  EXPECT_THROW(coordinate_exchange(problem, config), std::invalid_argument);
}

}  // namespace
}  // namespace fofdoe
