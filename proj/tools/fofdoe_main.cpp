// Command-line front end: optimize designs, evaluate and serialize them,
// simulate experiments, fit the estimator, compare designs by simulation,
// and reproduce the benchmark tables.
//
// Exit codes: 0 success, 2 configuration error, 3 infeasible problem,
// 4 reproduction outside the acceptance bands.

#include "fofdoe/fofdoe.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitAcceptance = 4;

struct CommonFlags {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> starts;
  std::optional<int> threads;
  std::optional<std::string> criterion;
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags->config_path,
                              "experiment configuration file");
  if (config_required) opt->required();
  cmd->add_option("--out", flags->out_dir, "output directory (overrides config)");
  cmd->add_option("--seed", flags->seed, "search seed (overrides config)");
  cmd->add_option("--starts", flags->starts, "random starts (overrides config)");
  cmd->add_option("--threads", flags->threads, "worker threads, 0 = all cores");
  cmd->add_option("--criterion", flags->criterion, "A or D (overrides config)")
      ->check(CLI::IsMember({"A", "D"}));
}

fofdoe::ExperimentConfig load_config(const CommonFlags& flags) {
  std::ifstream in(flags.config_path);
  if (!in)
    throw fofdoe::config_error("cannot open config file: " + flags.config_path);
  std::ostringstream text;
  text << in.rdbuf();
  fofdoe::ExperimentConfig config = fofdoe::parse_config(text.str());
  if (flags.out_dir) config.outputs.directory = *flags.out_dir;
  if (flags.seed) {
    config.exchange.seed = *flags.seed;
    config.noise.seed = *flags.seed;
  }
  if (flags.starts) config.exchange.random_starts = *flags.starts;
  if (flags.threads) config.exchange.threads = *flags.threads;
  if (flags.criterion)
    config.problem.criterion =
        *flags.criterion == "A" ? fofdoe::Criterion::A : fofdoe::Criterion::D;
  config.exchange.validate();
  return config;
}

void print_summary(const fofdoe::DesignProblem& problem,
                   const fofdoe::InformationSummary& info) {
  std::printf("criterion           %s\n", fofdoe::to_string(problem.criterion).c_str());
  std::printf("A-value             %.6g\n", fofdoe::a_value(info));
  std::printf("D-value             %.6g\n", fofdoe::d_value(info));
  std::printf("reciprocal condition %.3e\n", info.reciprocal_condition);
  std::printf("feasible            %s\n", info.feasible ? "yes" : "no");
}

void write_report(const std::filesystem::path& dir,
                  const fofdoe::DesignProblem& problem,
                  const fofdoe::InformationSummary& info,
                  const fofdoe::SearchResult* search) {
  std::ofstream out(dir / "report.csv");
  if (!out) throw std::runtime_error("failed to open " + (dir / "report.csv").string());
  out << std::setprecision(17);
  out << "key,value\n";
  out << "criterion," << fofdoe::to_string(problem.criterion) << "\n";
  out << "a_value," << fofdoe::a_value(info) << "\n";
  out << "d_value," << fofdoe::d_value(info) << "\n";
  out << "reciprocal_condition," << info.reciprocal_condition << "\n";
  out << "feasible," << (info.feasible ? "yes" : "no") << "\n";
  if (search) {
    out << "random_starts," << search->per_start_values.size() << "\n";
    out << "best_start," << search->best_start << "\n";
    out << "passes_best_start," << search->passes_used[search->best_start] << "\n";
    out << "wall_seconds," << search->wall_seconds << "\n";
  }
}

int run_optimize(const CommonFlags& flags) {
  const fofdoe::ExperimentConfig config = load_config(flags);
  for (const std::string& warning : fofdoe::validate(config.problem).warnings)
    std::fprintf(stderr, "warning: %s\n", warning.c_str());
  const fofdoe::SearchResult result =
      fofdoe::coordinate_exchange(config.problem, config.exchange);
  if (result.all_infeasible) {
    std::fprintf(stderr, "all %zu random starts were infeasible\n",
                 result.per_start_values.size());
    return kExitInfeasible;
  }
  std::filesystem::create_directories(config.outputs.directory);
  fofdoe::emit_design(result.best_design, config.problem, config.outputs);
  const fofdoe::InformationSummary info =
      fofdoe::information(result.best_design, fofdoe::assemble_J(config.problem));
  write_report(config.outputs.directory, config.problem, info, &result);
  std::printf("best value          %.10g (start %d, %.2fs)\n", result.best_value,
              result.best_start, result.wall_seconds);
  print_summary(config.problem, info);
  std::printf("artifacts written to %s\n", config.outputs.directory.c_str());
  return 0;
}

int run_evaluate(const CommonFlags& flags, const std::string& design_path) {
  const fofdoe::ExperimentConfig config = load_config(flags);
  const fofdoe::Design design =
      fofdoe::read_design_csv(design_path, config.problem);
  const fofdoe::InformationSummary info =
      fofdoe::information(design, fofdoe::assemble_J(config.problem));
  print_summary(config.problem, info);
  if (flags.out_dir) {
    std::filesystem::create_directories(*flags.out_dir);
    write_report(*flags.out_dir, config.problem, info, nullptr);
  }
  return 0;
}

int run_simulate(const CommonFlags& flags, const std::string& design_path) {
  const fofdoe::ExperimentConfig config = load_config(flags);
  fofdoe::Design design;
  if (!design_path.empty()) {
    design = fofdoe::read_design_csv(design_path, config.problem);
  } else {
    std::mt19937_64 rng(fofdoe::derive_seed(config.noise.seed, 1));
    design = fofdoe::random_design(config.problem, rng);
  }
  const fofdoe::TrueCoefficient truth =
      fofdoe::default_truth(static_cast<int>(config.problem.factors.size()));
  std::mt19937_64 rng(config.noise.seed);
  const fofdoe::FunctionalDataset dataset =
      fofdoe::simulate_responses(design, truth, config.problem, config.noise, rng);

  std::filesystem::create_directories(config.outputs.directory);
  const std::filesystem::path dir(config.outputs.directory);
  fofdoe::write_dataset_csv(dir / "dataset.csv", dataset);
  fofdoe::write_design_csv(dir / "design.csv", design, config.problem);
  if (config.outputs.emit_svg) {
    const Eigen::MatrixXd curves = dataset.responses.transpose();
    const double lo = curves.minCoeff(), hi = curves.maxCoeff();
    const double pad = 0.05 * std::max(hi - lo, 1e-9);
    fofdoe::write_svg_curves(dir / "responses.svg", curves, lo - pad, hi + pad);
  }
  std::printf("simulated %d response curves on %d grid points -> %s\n",
              config.problem.n_runs, config.noise.grid_size,
              config.outputs.directory.c_str());
  return 0;
}

int run_estimate(const CommonFlags& flags, const std::string& design_path,
                 const std::string& data_path) {
  const fofdoe::ExperimentConfig config = load_config(flags);
  const fofdoe::Design design =
      fofdoe::read_design_csv(design_path, config.problem);
  const fofdoe::FunctionalDataset dataset = fofdoe::read_dataset_csv(data_path);
  const fofdoe::BasisSystem theta(config.estimate.theta);
  std::vector<fofdoe::BasisSystem> coeff_bases;
  for (const fofdoe::FactorSpec& factor : config.problem.factors)
    coeff_bases.emplace_back(factor.coeff_basis);

  const Eigen::MatrixXd y = fofdoe::project_responses(dataset, theta);
  const Eigen::MatrixXd z = design.gamma * fofdoe::assemble_J(config.problem);
  const fofdoe::CoefficientEstimate estimate =
      fofdoe::fit(z, y, theta, coeff_bases);

  std::filesystem::create_directories(config.outputs.directory);
  const std::filesystem::path dir(config.outputs.directory);
  fofdoe::write_matrix_csv(dir / "b_hat.csv", estimate.B_hat);
  for (std::size_t i = 0; i < config.problem.factors.size(); ++i)
    fofdoe::write_beta_surface_csv(
        dir / ("beta" + std::to_string(i + 1) + "_surface.csv"), estimate,
        static_cast<int>(i + 1));
  {
    std::ofstream out(dir / "beta0.csv");
    out << std::setprecision(17) << "t,value\n";
    for (int j = 0; j <= 100; ++j) {
      const double t = j / 100.0;
      out << t << "," << fofdoe::reconstruct_beta(estimate, 0.0, t)(0) << "\n";
    }
  }
  if (dataset.responses.rows() > z.cols()) {
    const Eigen::MatrixXd residual = y - z * estimate.B_hat;
    const fofdoe::NoiseCovariance sigma =
        fofdoe::estimate_sigma(residual, static_cast<int>(z.cols()));
    fofdoe::write_matrix_csv(dir / "sigma.csv", sigma.sigma);
  } else {
    std::fprintf(stderr,
                 "warning: no residual degrees of freedom, skipping sigma.csv\n");
  }
  std::printf("estimated %ld x %ld coefficient matrix -> %s\n",
              static_cast<long>(estimate.B_hat.rows()),
              static_cast<long>(estimate.B_hat.cols()),
              config.outputs.directory.c_str());
  return 0;
}

int run_compare(const CommonFlags& flags, int reps) {
  const fofdoe::ExperimentConfig config = load_config(flags);
  const fofdoe::TrueCoefficient truth =
      fofdoe::default_truth(static_cast<int>(config.problem.factors.size()));
  const fofdoe::SearchResult search =
      fofdoe::coordinate_exchange(config.problem, config.exchange);
  if (search.all_infeasible) {
    std::fprintf(stderr, "optimizer found no feasible design\n");
    return kExitInfeasible;
  }
  const fofdoe::DesignComparison report = fofdoe::compare_designs(
      config.problem, truth, config.noise, search.best_design,
      config.estimate.theta, reps, config.noise.seed);

  std::filesystem::create_directories(config.outputs.directory);
  const std::filesystem::path dir(config.outputs.directory);
  fofdoe::write_design_csv(dir / "optimal_design.csv", search.best_design,
                           config.problem);
  {
    std::ofstream out(dir / "ise_report.csv");
    out << std::setprecision(17) << "replicate,ise_random,ise_optimal\n";
    for (int r = 0; r < reps; ++r)
      out << r + 1 << "," << report.ise_random[r] << "," << report.ise_optimal[r]
          << "\n";
    out << "mean," << report.mean_random << "," << report.mean_optimal << "\n";
  }
  if (config.outputs.emit_svg) {
    // one illustrative replicate per arm, shared noise
    std::mt19937_64 noise_rng(fofdoe::derive_seed(config.noise.seed, 0));
    std::mt19937_64 design_rng(fofdoe::derive_seed(config.noise.seed, 1));
    const Eigen::MatrixXd noise = fofdoe::simulate_errors(
        config.problem.n_runs, config.noise, noise_rng);
    const fofdoe::Design random =
        fofdoe::random_design(config.problem, design_rng);
    const Eigen::VectorXd grid = fofdoe::uniform_grid(config.noise.grid_size);
    for (const auto& [design, name] :
         {std::pair{&random, "random_responses.svg"},
          std::pair{&search.best_design, "optimal_responses.svg"}}) {
      const Eigen::MatrixXd responses =
          (fofdoe::mean_responses(*design, truth, config.problem, grid) + noise)
              .transpose();
      const double lo = responses.minCoeff(), hi = responses.maxCoeff();
      const double pad = 0.05 * std::max(hi - lo, 1e-9);
      fofdoe::write_svg_curves(dir / name, responses, lo - pad, hi + pad);
    }
  }
  std::printf("mean ISE  random  %.6g\n", report.mean_random);
  std::printf("mean ISE  optimal %.6g\n", report.mean_optimal);
  std::printf("ratio optimal/random %.4f over %d replicates\n", report.ratio, reps);
  return 0;
}

int run_reproduce(const CommonFlags& flags, const std::string& table_id) {
  fofdoe::ExchangeConfig exchange;
  if (flags.seed) exchange.seed = *flags.seed;
  if (flags.starts) exchange.random_starts = *flags.starts;
  if (flags.threads) exchange.threads = *flags.threads;
  exchange.validate();
  const std::string out_dir = flags.out_dir.value_or("out");
  std::filesystem::create_directories(out_dir);

  if (table_id == "scenario3") {
    const fofdoe::TwoFactorScenario scenario = fofdoe::two_factor_scenario();
    const fofdoe::SearchResult result =
        fofdoe::coordinate_exchange(scenario.problem, exchange);
    if (result.all_infeasible) return kExitInfeasible;
    const double lower = fofdoe::a_value_lower_bound(scenario.problem);
    const bool ok =
        result.best_value <= scenario.reference * (1.0 + scenario.tolerance) &&
        result.best_value >= lower * (1.0 - 1e-9);
    std::printf("two-factor scenario: computed %.6g, reference %.6g, %s\n",
                result.best_value, scenario.reference, ok ? "OK" : "OUT OF BAND");
    fofdoe::write_design_csv(std::filesystem::path(out_dir) / "scenario3_design.csv",
                             result.best_design, scenario.problem);
    return ok ? 0 : kExitAcceptance;
  }

  const fofdoe::ScenarioTable& table = fofdoe::scenario_table(table_id);
  const fofdoe::TableOutcome outcome =
      fofdoe::optimize_scenario_batch(table, exchange);
  const fofdoe::ReproductionReport report =
      fofdoe::check_against_reference(table, outcome);
  const std::filesystem::path dir(out_dir);
  fofdoe::write_reproduction_csv(dir / ("table" + table_id + "_reproduction.csv"),
                                 report);
  fofdoe::write_scenario_csv(dir / ("table" + table_id + "_designs.csv"), table,
                             outcome, exchange);
  for (const fofdoe::CellCheck& check : report.checks) {
    if (!check.reference_feasible && !check.computed_feasible) {
      std::printf("Kx=%-3d Kb=%-2d -         (reference -)        %s\n",
                  check.breaks_x, check.breaks_beta, check.ok ? "OK" : "MISMATCH");
    } else {
      std::printf("Kx=%-3d Kb=%-2d %-9.4g (reference %-8.4g) %+6.2f%% %s\n",
                  check.breaks_x, check.breaks_beta, check.computed,
                  check.reference, 100.0 * check.deviation,
                  check.ok ? "OK" : "OUT OF BAND");
    }
  }
  std::printf("table %s: %s\n", table_id.c_str(),
              report.ok ? "all cells within tolerance" : "tolerance violated");
  return report.ok ? 0 : kExitAcceptance;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"A-/D-optimal experimental designs for function-on-function "
               "linear models with dynamic factors"};
  app.require_subcommand(1);

  CommonFlags optimize_flags, evaluate_flags, simulate_flags, estimate_flags,
      compare_flags, reproduce_flags;
  std::string evaluate_design, simulate_design, estimate_design, estimate_data;
  int compare_reps = 100;
  std::string table_id;

  CLI::App* optimize = app.add_subcommand("optimize", "search for an optimal design");
  add_common_flags(optimize, &optimize_flags, true);

  CLI::App* evaluate = app.add_subcommand("evaluate", "evaluate a design CSV");
  add_common_flags(evaluate, &evaluate_flags, true);
  evaluate->add_option("--design", evaluate_design, "design CSV")->required();

  CLI::App* simulate = app.add_subcommand("simulate", "simulate an experiment");
  add_common_flags(simulate, &simulate_flags, true);
  simulate->add_option("--design", simulate_design,
                       "design CSV (default: random design)");

  CLI::App* estimate = app.add_subcommand("estimate", "fit the functional coefficient");
  add_common_flags(estimate, &estimate_flags, true);
  estimate->add_option("--design", estimate_design, "design CSV")->required();
  estimate->add_option("--data", estimate_data, "dataset CSV")->required();

  CLI::App* compare = app.add_subcommand(
      "compare", "replicate random-vs-optimal estimation accuracy");
  add_common_flags(compare, &compare_flags, true);
  compare->add_option("--reps", compare_reps, "number of replicates");

  CLI::App* reproduce =
      app.add_subcommand("reproduce-table", "recompute a benchmark table");
  add_common_flags(reproduce, &reproduce_flags, false);
  reproduce->add_option("table", table_id, "table id: 1, 2, 3 or scenario3")
      ->required()
      ->check(CLI::IsMember({"1", "2", "3", "scenario3"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (optimize->parsed()) return run_optimize(optimize_flags);
    if (evaluate->parsed()) return run_evaluate(evaluate_flags, evaluate_design);
    if (simulate->parsed()) return run_simulate(simulate_flags, simulate_design);
    if (estimate->parsed())
      return run_estimate(estimate_flags, estimate_design, estimate_data);
    if (compare->parsed()) return run_compare(compare_flags, compare_reps);
    if (reproduce->parsed()) return run_reproduce(reproduce_flags, table_id);
  } catch (const fofdoe::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const fofdoe::infeasible_error& e) {
    std::fprintf(stderr, "infeasible problem: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
