// Synthetic function-on-function experiments: Gaussian-process error paths
// represented in a finite Fourier family, exact mean responses through the
// basis Gram matrices, and the random-vs-optimal design comparison.

#pragma once

#include "fofdoe/estimation.hpp"
#include "fofdoe/optimizer.hpp"

#include <cstdint>
#include <random>

namespace fofdoe {

enum class NoiseKernel { RBF };

struct GPNoiseConfig {
  NoiseKernel kernel = NoiseKernel::RBF;
  double bandwidth = 1e-4;      // squared length scale in the RBF exponent
  double variance = 0.005;      // pointwise process variance
  int representation_size = 81; // Fourier functions kept after projection
  int grid_size = 201;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(bandwidth > 0))
      throw std::invalid_argument("GPNoiseConfig: bandwidth must be > 0");
    if (!(variance > 0))
      throw std::invalid_argument("GPNoiseConfig: variance must be > 0");
    if (representation_size < 1)
      throw std::invalid_argument("GPNoiseConfig: representation_size must be >= 1");
    if (grid_size < 2)
      throw std::invalid_argument("GPNoiseConfig: grid_size must be >= 2");
  }
};

/// Ground truth shares the estimate's layout: a coefficient matrix plus the
/// bases that give it meaning (the response-direction basis need not be
/// orthonormal here).
using TrueCoefficient = CoefficientEstimate;

inline Eigen::VectorXd uniform_grid(int size) {
  return Eigen::VectorXd::LinSpaced(size, 0.0, 1.0);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

/// Default ground truth: separable cubic polynomials in both directions
/// (single-interval cubic B-splines), with a fixed seeded draw of
/// coefficients in [-1,1].
inline TrueCoefficient default_truth(int n_factors,
                                     std::uint64_t seed = 0x5eedf0fdULL) {
  const BasisSpec cubic = BasisSpec::bspline(3, 2);
  TrueCoefficient truth{Eigen::MatrixXd(), BasisSystem(cubic), {}};
  truth.coeff_bases.assign(n_factors, BasisSystem(cubic));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  truth.B_hat.resize(1 + 4 * n_factors, 4);
  for (Eigen::Index r = 0; r < truth.B_hat.rows(); ++r)
    for (Eigen::Index c = 0; c < truth.B_hat.cols(); ++c)
      truth.B_hat(r, c) = unif(rng);
  return truth;
}

/// Zero-mean GP paths on the uniform grid: exact Cholesky draw from the RBF
/// covariance (diagonal jitter added as needed), then projected onto the
/// leading orthonormal Fourier functions and reconstructed.
inline Eigen::MatrixXd simulate_errors(int n, const GPNoiseConfig& config,
                                       std::mt19937_64& rng) {
  config.validate();
  const int t = config.grid_size;
  const Eigen::VectorXd grid = uniform_grid(t);
  Eigen::MatrixXd cov(t, t);
  for (int i = 0; i < t; ++i)
    for (int j = 0; j < t; ++j) {
      const double d = grid(i) - grid(j);
      cov(i, j) = config.variance * std::exp(-d * d / (2.0 * config.bandwidth));
    }

  Eigen::LLT<Eigen::MatrixXd> chol;
  double jitter = 1e-10 * config.variance;
  for (;;) {
    chol.compute(cov + jitter * Eigen::MatrixXd::Identity(t, t));
    if (chol.info() == Eigen::Success) break;
    jitter *= 2.0;
    if (jitter > 1e-6 * config.variance)
      throw std::runtime_error(
          "simulate_errors: covariance not positive definite within the jitter ceiling");
  }

  std::normal_distribution<double> gauss;
  Eigen::MatrixXd draws(n, t);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < t; ++c) draws(r, c) = gauss(rng);
  const Eigen::MatrixXd paths = draws * chol.matrixL().transpose();

  // representation step: keep the leading Fourier coordinates
  const BasisSystem fourier(BasisSpec::fourier(config.representation_size));
  Eigen::MatrixXd theta_vals(t, config.representation_size);
  for (int i = 0; i < t; ++i)
    theta_vals.row(i) = fourier.eval(grid(i)).transpose();
  const Eigen::VectorXd w = trapezoid_weights(grid);
  const Eigen::MatrixXd coords = paths * w.asDiagonal() * theta_vals;
  return coords * theta_vals.transpose();
}

inline void check_conformity(const Design& design, const TrueCoefficient& truth,
                             const DesignProblem& problem) {
  if (truth.coeff_bases.size() != problem.factors.size())
    throw std::invalid_argument("simulate: truth and problem factor counts differ");
  int rows = 1;
  for (const BasisSystem& basis : truth.coeff_bases) rows += basis.dimension();
  if (truth.B_hat.rows() != rows)
    throw std::invalid_argument("simulate: truth coefficient rows do not match its bases");
  if (truth.B_hat.cols() != truth.theta_basis.dimension())
    throw std::invalid_argument("simulate: truth coefficient columns do not match its response basis");
  const BlockLayout layout = block_layout(problem);
  if (design.gamma.rows() != problem.n_runs || design.gamma.cols() != layout.gamma_cols)
    throw std::invalid_argument("simulate: design does not conform to the problem");
}

/// Noise-free responses on the grid. The s-integral is exact: with both the
/// runs and the truth expanded in bases it reduces to the cross-Gram matrices
/// gram(factor basis, truth basis).
inline Eigen::MatrixXd mean_responses(const Design& design,
                                      const TrueCoefficient& truth,
                                      const DesignProblem& problem,
                                      const Eigen::VectorXd& grid) {
  check_conformity(design, truth, problem);
  const int t = static_cast<int>(grid.size());
  const int l = truth.theta_basis.dimension();
  Eigen::MatrixXd theta_vals(t, l);
  for (int i = 0; i < t; ++i)
    theta_vals.row(i) = truth.theta_basis.eval(grid(i)).transpose();

  // run coordinates in the truth's response basis: intercept + factor blocks
  Eigen::MatrixXd coords = Eigen::MatrixXd::Zero(problem.n_runs, l);
  coords.rowwise() += truth.B_hat.row(0);
  const BlockLayout layout = block_layout(problem);
  int truth_offset = 1;
  for (std::size_t i = 0; i < problem.factors.size(); ++i) {
    const BasisSystem factor_basis(problem.factors[i].factor_basis);
    const int dim = truth.coeff_bases[i].dimension();
    const Eigen::MatrixXd j_i = gram(factor_basis, truth.coeff_bases[i]);
    coords.noalias() +=
        design.gamma.middleCols(layout.factor_offset[i], layout.factor_dim[i]) *
        j_i * truth.B_hat.middleRows(truth_offset, dim);
    truth_offset += dim;
  }
  return coords * theta_vals.transpose();
}

inline FunctionalDataset simulate_responses(const Design& design,
                                            const TrueCoefficient& truth,
                                            const DesignProblem& problem,
                                            const GPNoiseConfig& config,
                                            std::mt19937_64& rng) {
  FunctionalDataset dataset;
  dataset.grid = uniform_grid(config.grid_size);
  dataset.responses = mean_responses(design, truth, problem, dataset.grid) +
                      simulate_errors(problem.n_runs, config, rng);
  return dataset;
}

/// Integrated squared error of one coefficient surface between two coefficient
/// sets, by trapezoid quadrature on a grid_points^2 lattice.
inline double integrated_squared_error(const CoefficientEstimate& a,
                                       const CoefficientEstimate& b,
                                       int component, int grid_points = 101) {
  const Eigen::VectorXd grid = uniform_grid(grid_points);
  const Eigen::VectorXd w = trapezoid_weights(grid);
  double total = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    for (int j = 0; j < grid_points; ++j) {
      const double diff = reconstruct_beta(a, grid(i), grid(j))(component) -
                          reconstruct_beta(b, grid(i), grid(j))(component);
      total += w(i) * w(j) * diff * diff;
    }
  }
  return total;
}

struct DesignComparison {
  std::vector<double> ise_random;
  std::vector<double> ise_optimal;
  double mean_random = 0.0;
  double mean_optimal = 0.0;
  double ratio = 0.0;  // mean_optimal / mean_random
};

/// Replicated comparison of a fixed (typically A-optimal) design against
/// fresh uniform random designs. Noise paths are shared between the two arms
/// of each replicate, so identical designs give identical errors.
inline DesignComparison compare_designs(const DesignProblem& problem,
                                        const TrueCoefficient& truth,
                                        const GPNoiseConfig& config,
                                        const Design& optimal_design,
                                        const BasisSpec& estimator_theta,
                                        int n_reps, std::uint64_t seed) {
  require_valid(problem);
  check_conformity(optimal_design, truth, problem);
  const BasisSystem theta(estimator_theta);
  std::vector<BasisSystem> coeff_bases;
  for (const FactorSpec& factor : problem.factors)
    coeff_bases.emplace_back(factor.coeff_basis);
  const Eigen::MatrixXd j = assemble_J(problem);
  const Eigen::VectorXd grid = uniform_grid(config.grid_size);

  DesignComparison report;
  report.ise_random.reserve(n_reps);
  report.ise_optimal.reserve(n_reps);
  for (int rep = 0; rep < n_reps; ++rep) {
    std::mt19937_64 noise_rng(derive_seed(seed, 2 * rep));
    std::mt19937_64 design_rng(derive_seed(seed, 2 * rep + 1));
    const Eigen::MatrixXd noise =
        simulate_errors(problem.n_runs, config, noise_rng);
    const Design random = random_design(problem, design_rng);

    for (const Design* design : {&random, &optimal_design}) {
      FunctionalDataset dataset;
      dataset.grid = grid;
      dataset.responses = mean_responses(*design, truth, problem, grid) + noise;
      const Eigen::MatrixXd y = project_responses(dataset, theta);
      const Eigen::MatrixXd z = design->gamma * j;
      const CoefficientEstimate estimate = fit(z, y, theta, coeff_bases);
      const double ise = integrated_squared_error(estimate, truth, 1);
      (design == &random ? report.ise_random : report.ise_optimal).push_back(ise);
    }
  }
  const auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  report.mean_random = mean(report.ise_random);
  report.mean_optimal = mean(report.ise_optimal);
  report.ratio = report.mean_optimal / report.mean_random;
  return report;
}

}  // namespace fofdoe
