// Fitting the function-on-function model: projection of densely observed
// responses onto the orthonormal response basis, the least-squares coefficient
// matrix, its Kronecker-structured covariance, and reconstruction of the
// coefficient surfaces.

#pragma once

#include "fofdoe/design.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fofdoe {

/// Densely observed functional responses on a common grid in [0,1].
struct FunctionalDataset {
  Eigen::VectorXd grid;        // strictly increasing, length T
  Eigen::MatrixXd responses;   // N x T

  void validate() const {
    if (grid.size() < 2)
      throw std::invalid_argument("FunctionalDataset: grid needs >= 2 points");
    if (grid(0) < 0.0 || grid(grid.size() - 1) > 1.0)
      throw std::invalid_argument("FunctionalDataset: grid must lie in [0,1]");
    for (Eigen::Index i = 1; i < grid.size(); ++i)
      if (!(grid(i) > grid(i - 1)))
        throw std::invalid_argument("FunctionalDataset: grid must be strictly increasing");
    if (responses.cols() != grid.size())
      throw std::invalid_argument("FunctionalDataset: responses must have one column per grid point");
  }
};

/// Estimated super matrix of coefficients together with the bases needed to
/// reconstruct the coefficient surfaces. Row 0 holds the intercept
/// coefficients; block i has dim(coeff_basis_i) rows.
struct CoefficientEstimate {
  Eigen::MatrixXd B_hat;  // (1 + sum K^i) x L
  BasisSystem theta_basis;
  std::vector<BasisSystem> coeff_bases;
};

struct NoiseCovariance {
  Eigen::MatrixXd sigma;  // L x L, symmetric PSD
};

inline Eigen::VectorXd trapezoid_weights(const Eigen::VectorXd& grid) {
  const Eigen::Index t = grid.size();
  Eigen::VectorXd w = Eigen::VectorXd::Zero(t);
  for (Eigen::Index i = 0; i + 1 < t; ++i) {
    const double h = 0.5 * (grid(i + 1) - grid(i));
    w(i) += h;
    w(i + 1) += h;
  }
  return w;
}

inline Eigen::MatrixXd kronecker_product(const Eigen::MatrixXd& a,
                                         const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Y[n,l] ~= integral of y_n(t) theta_l(t) dt, by composite trapezoid on the
/// observation grid.
inline Eigen::MatrixXd project_responses(const FunctionalDataset& dataset,
                                         const BasisSystem& theta_basis) {
  dataset.validate();
  const Eigen::Index t = dataset.grid.size();
  const int l = theta_basis.dimension();
  if (t < l)
    throw std::invalid_argument(
        "project_responses: ill-posed projection, " + std::to_string(t) +
        " grid points for " + std::to_string(l) + " basis functions");
  Eigen::MatrixXd theta_vals(t, l);
  for (Eigen::Index i = 0; i < t; ++i)
    theta_vals.row(i) = theta_basis.eval(dataset.grid(i)).transpose();
  const Eigen::VectorXd w = trapezoid_weights(dataset.grid);
  return dataset.responses * w.asDiagonal() * theta_vals;
}

/// Least-squares estimate B_hat = (Z'Z)^-1 Z' Y, computed through a
/// rank-revealing QR factorization of Z.
inline CoefficientEstimate fit(const Eigen::MatrixXd& z, const Eigen::MatrixXd& y,
                               const BasisSystem& theta_basis,
                               const std::vector<BasisSystem>& coeff_bases) {
  int expected_rows = 1;
  for (const BasisSystem& basis : coeff_bases) expected_rows += basis.dimension();
  if (z.cols() != expected_rows)
    throw std::invalid_argument("fit: Z has " + std::to_string(z.cols()) +
                                " columns but the coefficient bases imply " +
                                std::to_string(expected_rows));
  if (z.rows() != y.rows())
    throw std::invalid_argument("fit: Z and Y row counts differ");
  if (y.cols() != theta_basis.dimension())
    throw std::invalid_argument("fit: Y has " + std::to_string(y.cols()) +
                                " columns but the response basis has dimension " +
                                std::to_string(theta_basis.dimension()));

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
  if (qr.rank() < z.cols()) {
    // map the non-pivoted columns back to their coefficient blocks
    const auto& perm = qr.colsPermutation().indices();
    std::string blocks;
    for (Eigen::Index k = qr.rank(); k < z.cols(); ++k) {
      const int col = perm(k);
      std::string name = "intercept";
      int offset = 1;
      for (std::size_t i = 0; i < coeff_bases.size(); ++i) {
        if (col >= offset && col < offset + coeff_bases[i].dimension())
          name = "factor " + std::to_string(i + 1);
        offset += coeff_bases[i].dimension();
      }
      if (blocks.find(name) == std::string::npos) {
        if (!blocks.empty()) blocks += ", ";
        blocks += name;
      }
    }
    throw infeasible_error("fit: model matrix is rank-deficient (rank " +
                           std::to_string(qr.rank()) + " of " +
                           std::to_string(z.cols()) +
                           "); deficient block(s): " + blocks);
  }
  return CoefficientEstimate{qr.solve(y), theta_basis, coeff_bases};
}

/// Var(vec B_hat) = Sigma (kron) (Z'Z)^-1, with vec stacking the columns of
/// B_hat.
inline Eigen::MatrixXd vec_variance(const NoiseCovariance& noise,
                                    const Eigen::MatrixXd& z) {
  const Eigen::MatrixXd m = z.transpose() * z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd& values = eig.eigenvalues();
  if (!(values.minCoeff() > 0.0) ||
      values.minCoeff() < kFeasibilityRcond * values.maxCoeff())
    throw infeasible_error("vec_variance: Z'Z is singular at tolerance");
  const Eigen::MatrixXd m_inv = eig.eigenvectors() *
                                values.cwiseInverse().asDiagonal() *
                                eig.eigenvectors().transpose();
  return kronecker_product(noise.sigma, m_inv);
}

/// Evaluates all coefficient surfaces at (s, t): component 0 is the intercept
/// beta_0(t), component i is beta_i(s, t).
inline Eigen::VectorXd reconstruct_beta(const CoefficientEstimate& estimate,
                                        double s, double t) {
  const Eigen::VectorXd theta = estimate.theta_basis.eval(t);
  Eigen::VectorXd beta(estimate.coeff_bases.size() + 1);
  beta(0) = estimate.B_hat.row(0) * theta;
  int offset = 1;
  for (std::size_t i = 0; i < estimate.coeff_bases.size(); ++i) {
    const int dim = estimate.coeff_bases[i].dimension();
    beta(i + 1) = estimate.coeff_bases[i].eval(s).transpose() *
                  estimate.B_hat.middleRows(offset, dim) * theta;
    offset += dim;
  }
  return beta;
}

/// Sample covariance of the projected residual rows, scaled by
/// 1 / (N - rank(Z)).
inline NoiseCovariance estimate_sigma(const Eigen::MatrixXd& residual,
                                      int rank_z) {
  const Eigen::Index n = residual.rows();
  if (n <= rank_z)
    throw std::invalid_argument(
        "estimate_sigma: no residual degrees of freedom (" + std::to_string(n) +
        " rows, rank " + std::to_string(rank_z) + ")");
  return NoiseCovariance{residual.transpose() * residual /
                         static_cast<double>(n - rank_z)};
}

}  // namespace fofdoe
