#include "fofdoe/config.hpp"
#include "fofdoe/io.hpp"
#include "fofdoe/scenarios.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace fofdoe {
namespace {

const char* kBaseConfig = R"(
# one-factor experiment
runs = 12
criterion = A
bound = 1

[factor]
x_family = bspline
x_degree = 0
x_breaks = 9
b_family = bspline
b_degree = 0
b_breaks = 3

[exchange]
random_starts = 40
candidate_levels = 21
seed = 5

[noise]
bandwidth = 1e-4
variance = 0.005

[estimate]
theta_size = 7

[output]
directory = out
emit_svg = false
curve_grid_size = 101
)";

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "fofdoe_io_test";
  std::filesystem::create_directories(dir);
  return dir;
}

TEST(ParseConfig, ValidScenarioOneConfig) {
  const ExperimentConfig config = parse_config(kBaseConfig);
  EXPECT_EQ(config.problem.n_runs, 12);
  EXPECT_EQ(config.problem.criterion, Criterion::A);
  ASSERT_EQ(config.problem.factors.size(), 1u);
  EXPECT_EQ(config.problem.factors[0].factor_basis.breakpoints, 9);
  EXPECT_EQ(config.problem.factors[0].coeff_basis.breakpoints, 3);
  EXPECT_EQ(config.exchange.random_starts, 40);
  EXPECT_EQ(config.exchange.seed, 5u);
  EXPECT_EQ(config.estimate.theta.size, 7);
  EXPECT_EQ(config.noise.grid_size, 201);  // default survives partial section
  EXPECT_EQ(config.outputs.curve_grid_size, 101);
  EXPECT_FALSE(config.outputs.emit_svg);
}

TEST(ParseConfig, TwoFactorSections) {
  const std::string text = R"(
runs = 12
[factor]
x_degree = 0
x_breaks = 5
b_degree = 0
b_breaks = 3
[factor]
x_degree = 2
x_breaks = 9
b_degree = 1
b_breaks = 3
)";
  const ExperimentConfig config = parse_config(text);
  ASSERT_EQ(config.problem.factors.size(), 2u);
  EXPECT_EQ(config.problem.factors[1].factor_basis.degree, 2);
  EXPECT_EQ(config.problem.factors[1].coeff_basis.dimension(), 3);
}

TEST(ParseConfig, Rejections) {
  EXPECT_THROW(parse_config(""), config_error);
  EXPECT_THROW(parse_config("   \n\t\n"), config_error);
  EXPECT_THROW(parse_config("runs = 12\n"), config_error);  // no factor
  EXPECT_THROW(parse_config("bogus = 1\n[factor]\nx_degree=0\nx_breaks=3\nb_degree=0\nb_breaks=3\n"),
               config_error);
  EXPECT_THROW(parse_config("runs = twelve\n"), config_error);
  EXPECT_THROW(parse_config("[mystery]\n"), config_error);
  EXPECT_THROW(parse_config("runs = 12\n[factor]\nx_degree=0\nx_breaks=3\nb_degree=0\nb_breaks=3\nsurprise=1\n"),
               config_error);
  EXPECT_THROW(parse_config("criterion = Q\n"), config_error);
  // response basis must be orthonormal
  EXPECT_THROW(parse_config("runs = 12\n[estimate]\ntheta_family = bspline\n"),
               config_error);
}

TEST(ParseConfig, IdentifiabilityViolationIsInfeasible) {
  const std::string text = R"(
runs = 12
[factor]
x_degree = 0
x_breaks = 3
b_degree = 0
b_breaks = 5
)";
  EXPECT_THROW(parse_config(text), infeasible_error);
}

TEST(DesignCsv, RoundTripPreservesCriterion) {
  const ExperimentConfig config = parse_config(kBaseConfig);
  std::mt19937_64 rng(3);
  const Design design = random_design(config.problem, rng);
  const auto path = temp_dir() / "design.csv";
  write_design_csv(path, design, config.problem);
  const Design loaded = read_design_csv(path, config.problem);
  EXPECT_TRUE(design.gamma == loaded.gamma);  // 17-digit round trip is exact
  EXPECT_EQ(criterion_value(config.problem, design),
            criterion_value(config.problem, loaded));
}

TEST(DatasetCsv, RoundTripIsExact) {
  FunctionalDataset dataset;
  dataset.grid = Eigen::VectorXd::LinSpaced(33, 0.0, 1.0);
  dataset.responses = Eigen::MatrixXd::Random(4, 33);
  const auto path = temp_dir() / "dataset.csv";
  write_dataset_csv(path, dataset);
  const FunctionalDataset loaded = read_dataset_csv(path);
  EXPECT_TRUE(dataset.grid == loaded.grid);
  EXPECT_TRUE(dataset.responses == loaded.responses);
}

TEST(RunCurves, ZeroDegreeStepsMatchGammaAtMidpoints) {
  DesignProblem problem;
  problem.n_runs = 3;
  problem.factors = {{BasisSpec::bspline(0, 5), BasisSpec::bspline(0, 3)}};
  std::mt19937_64 rng(8);
  const Design design = random_design(problem, rng);
  const Eigen::MatrixXd curves = sample_run_curves(design, problem, 0, 201);
  for (int n = 0; n < 3; ++n)
    for (int cell = 0; cell < 4; ++cell) {
      const double mid = (cell + 0.5) / 4.0;
      const int row = static_cast<int>(std::lround(mid * 200));
      EXPECT_NEAR(curves(row, n), design.gamma(n, 1 + cell), 1e-12);
    }
}

TEST(RunCurves, FirstDegreeInterpolatesGammaAtKnots) {
  DesignProblem problem;
  problem.n_runs = 2;
  problem.factors = {{BasisSpec::bspline(1, 5), BasisSpec::bspline(0, 3)}};
  std::mt19937_64 rng(9);
  const Design design = random_design(problem, rng);
  const Eigen::MatrixXd curves = sample_run_curves(design, problem, 0, 201);
  for (int n = 0; n < 2; ++n)
    for (int k = 0; k < 5; ++k) {
      const int row = k * 50;  // knots at multiples of 1/4 on a 201-point grid
      EXPECT_NEAR(curves(row, n), design.gamma(n, 1 + k), 1e-12);
    }
}

TEST(Svg, WritesPolylines) {
  const auto path = temp_dir() / "curves.svg";
  Eigen::MatrixXd curves(11, 2);
  for (int i = 0; i <= 10; ++i) {
    curves(i, 0) = std::sin(i * 0.3);
    curves(i, 1) = -0.5;
  }
  write_svg_curves(path, curves, -1.05, 1.05);
  std::ifstream in(path);
  ASSERT_TRUE(in.good());
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  EXPECT_NE(content.find("<svg"), std::string::npos);
  EXPECT_EQ(std::count(content.begin(), content.end(), '\n') > 5, true);
  EXPECT_NE(content.find("polyline"), std::string::npos);
}

TEST(EmitDesign, WritesAllArtifacts) {
  const ExperimentConfig base = parse_config(kBaseConfig);
  OutputConfig outputs = base.outputs;
  outputs.directory = (temp_dir() / "emit").string();
  outputs.emit_svg = true;
  std::mt19937_64 rng(4);
  const Design design = random_design(base.problem, rng);
  const auto written = emit_design(design, base.problem, outputs);
  ASSERT_EQ(written.size(), 3u);
  for (const auto& path : written) EXPECT_TRUE(std::filesystem::exists(path));
}

TEST(Scenarios, TableShapesAndDashes) {
  const ScenarioTable& t1 = scenario_table("1");
  ASSERT_EQ(t1.breaks_x.size(), 6u);
  ASSERT_EQ(t1.breaks_beta.size(), 3u);
  int dashes = 0;
  for (const auto& row : t1.reference)
    for (const ReferenceCell& cell : row)
      if (!cell.feasible()) ++dashes;
  EXPECT_EQ(dashes, 3);  // (3,5), (3,7), (5,7)
  EXPECT_FALSE(t1.reference[0][1].feasible());
  EXPECT_FALSE(t1.reference[0][2].feasible());
  EXPECT_FALSE(t1.reference[1][2].feasible());

  const ScenarioTable& t3 = scenario_table("3");
  EXPECT_EQ(t3.breaks_x.front(), 2);  // the single-interval first-degree row
  EXPECT_TRUE(t3.reference[0][0].feasible());
  EXPECT_FALSE(t3.reference[1][1].feasible());

  EXPECT_THROW(scenario_table("4"), std::invalid_argument);
}

TEST(Scenarios, DashFeasibilityMatchesValidation) {
  for (const std::string id : {"1", "2", "3"}) {
    const ScenarioTable& table = scenario_table(id);
    for (std::size_t r = 0; r < table.breaks_x.size(); ++r)
      for (std::size_t c = 0; c < table.breaks_beta.size(); ++c)
        EXPECT_EQ(validate(cell_problem(table, r, c)).ok(),
                  table.reference[r][c].feasible())
            << "table " << id << " cell (" << table.breaks_x[r] << ","
            << table.breaks_beta[c] << ")";
  }
}

TEST(Scenarios, NestedOptimumFormula) {
  EXPECT_NEAR(nested_zero_degree_optimum(12, 3), 0.75, 1e-15);
  EXPECT_NEAR(nested_zero_degree_optimum(12, 5), 65.0 / 12.0, 1e-12);
}

TEST(Scenarios, LowerBoundMatchesNestedOptimum) {
  const ScenarioTable& t1 = scenario_table("1");
  EXPECT_NEAR(a_value_lower_bound(cell_problem(t1, 0, 0)), 0.75, 1e-12);
  EXPECT_NEAR(a_value_lower_bound(cell_problem(t1, 1, 1)), 65.0 / 12.0, 1e-12);
  // bound must hold for a non-nested cell when the search runs
  const DesignProblem problem = cell_problem(t1, 3, 1);  // Kx=15, Kb=5
  ExchangeConfig config;
  config.random_starts = 20;
  config.seed = 2;
  const SearchResult result = coordinate_exchange(problem, config);
  EXPECT_GE(result.best_value, a_value_lower_bound(problem) - 1e-9);
}

TEST(Scenarios, BatchPropagatesDashesAndEfficiency) {
  // a reduced grid keeps this quick: reuse table 1's first rows
  ScenarioTable mini = scenario_table("1");
  mini.breaks_x = {3, 5};
  mini.reference.resize(2);
  ExchangeConfig config;
  config.random_starts = 30;
  config.seed = 11;
  const TableOutcome outcome = optimize_scenario_batch(mini, config);
  EXPECT_FALSE(outcome.cells[0][1].feasible);
  EXPECT_TRUE(outcome.cells[0][0].feasible);
  EXPECT_TRUE(outcome.cells[1][1].feasible);
  EXPECT_TRUE(std::isnan(outcome.efficiency[0][1]));
  // both feasible column-3 cells reach 0.75, so efficiency is 1.00 for each
  EXPECT_NEAR(outcome.efficiency[0][0], 1.0, 1e-9);
  EXPECT_NEAR(outcome.efficiency[1][0], 1.0, 1e-9);

  const ReproductionReport report = check_against_reference(mini, outcome);
  EXPECT_TRUE(report.ok);
  const auto dir = temp_dir();
  write_reproduction_csv(dir / "repro.csv", report);
  write_scenario_csv(dir / "designs.csv", mini, outcome, config);
  std::ifstream archive(dir / "designs.csv");
  std::string header;
  std::getline(archive, header);
  EXPECT_EQ(header,
            "id,epochs,Runs,X family,X degree,X breaks,B family,B degree,"
            "B breaks,design,criterion");
  std::string row_one, row_two;
  std::getline(archive, row_one);
  std::getline(archive, row_two);
  EXPECT_EQ(row_one.find("NONE"), std::string::npos);   // (3,3) is feasible
  EXPECT_NE(row_two.find("NONE"), std::string::npos);   // (3,5) is a dash
}

TEST(Scenarios, TwoFactorScenarioShape) {
  const TwoFactorScenario scenario = two_factor_scenario();
  EXPECT_TRUE(validate(scenario.problem).ok());
  const BlockLayout layout = block_layout(scenario.problem);
  EXPECT_EQ(layout.gamma_cols, 15);  // 1 + 4 + 10
  EXPECT_EQ(layout.z_cols, 6);       // 1 + 2 + 3
  EXPECT_NEAR(scenario.reference, 6.425, 1e-12);
}

}  // namespace
}  // namespace fofdoe
