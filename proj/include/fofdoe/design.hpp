// Design problems for function-on-function linear models with dynamic
// factors: the coefficient matrix Gamma identifying a design, the reduced
// model matrix Z = Gamma * J, and the A-/D-optimality criteria evaluated
// on the information matrix M = Z' Z.

#pragma once

#include "fofdoe/basis.hpp"

#include <Eigen/Dense>

#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fofdoe {

enum class Criterion { A, D };

inline std::string to_string(Criterion c) { return c == Criterion::A ? "A" : "D"; }

/// Basis pair for one dynamic factor: the basis the experimenter uses to
/// realize runs x(s), and the basis expanding the unknown coefficient
/// surface in the s direction.
struct FactorSpec {
  BasisSpec factor_basis;
  BasisSpec coeff_basis;
};

struct DesignProblem {
  int n_runs = 2;
  std::vector<FactorSpec> factors;
  Criterion criterion = Criterion::A;
  double bound = 1.0;  // box limit on design coefficients
};

/// Thrown when a problem or design cannot support estimation (rank or
/// identifiability conditions violated).
class infeasible_error : public std::runtime_error {
 public:
  explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

/// Column layout of Gamma (factor blocks after the intercept column) and of
/// Z (coefficient blocks after the intercept column).
struct BlockLayout {
  std::vector<int> factor_offset, factor_dim;
  std::vector<int> coeff_offset, coeff_dim;
  int gamma_cols = 1;
  int z_cols = 1;
};

inline BlockLayout block_layout(const DesignProblem& problem) {
  BlockLayout layout;
  int gcol = 1, zcol = 1;
  for (const FactorSpec& factor : problem.factors) {
    layout.factor_offset.push_back(gcol);
    layout.factor_dim.push_back(factor.factor_basis.dimension());
    layout.coeff_offset.push_back(zcol);
    layout.coeff_dim.push_back(factor.coeff_basis.dimension());
    gcol += factor.factor_basis.dimension();
    zcol += factor.coeff_basis.dimension();
  }
  layout.gamma_cols = gcol;
  layout.z_cols = zcol;
  return layout;
}

struct ProblemValidation {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

/// Checks the identifiability condition dim(factor) >= dim(coeff) per factor
/// and the estimability rank condition N >= 1 + sum dim(coeff). Equality in
/// the latter leaves no residual degrees of freedom and yields a warning.
inline ProblemValidation validate(const DesignProblem& problem) {
  ProblemValidation result;
  if (problem.n_runs < 2)
    result.errors.push_back("n_runs must be >= 2, got " +
                            std::to_string(problem.n_runs));
  if (problem.factors.empty()) result.errors.push_back("at least one factor required");
  if (!(problem.bound > 0))
    result.errors.push_back("bound must be positive, got " +
                            std::to_string(problem.bound));
  for (std::size_t i = 0; i < problem.factors.size(); ++i) {
    const FactorSpec& factor = problem.factors[i];
    try {
      factor.factor_basis.validate();
      factor.coeff_basis.validate();
    } catch (const std::invalid_argument& e) {
      result.errors.push_back("factor " + std::to_string(i + 1) + ": " + e.what());
      continue;
    }
    if (factor.factor_basis.dimension() < factor.coeff_basis.dimension()) {
      std::ostringstream msg;
      msg << "factor " << i + 1 << ": factor basis dimension ("
          << factor.factor_basis.dimension()
          << ") must be at least the coefficient basis dimension ("
          << factor.coeff_basis.dimension() << ") to ensure identifiability";
      result.errors.push_back(msg.str());
    }
  }
  if (result.errors.empty()) {
    const BlockLayout layout = block_layout(problem);
    if (problem.n_runs < layout.z_cols) {
      std::ostringstream msg;
      msg << "estimability requires n_runs >= " << layout.z_cols
          << " (intercept plus coefficient dimensions), got " << problem.n_runs;
      result.errors.push_back(msg.str());
    } else if (problem.n_runs == layout.z_cols) {
      result.warnings.push_back(
          "n_runs equals the number of model columns; the criterion is "
          "computable but no residual degrees of freedom remain");
    }
  }
  return result;
}

inline void require_valid(const DesignProblem& problem) {
  const ProblemValidation check = validate(problem);
  if (!check.ok()) {
    std::string joined;
    for (const std::string& e : check.errors) {
      if (!joined.empty()) joined += "; ";
      joined += e;
    }
    throw infeasible_error(joined);
  }
}

/// A design, identified by its coefficient matrix Gamma: one row per run,
/// column 0 fixed at 1 (intercept), factor blocks bounded by the box limit.
struct Design {
  Eigen::MatrixXd gamma;

  int n_runs() const { return static_cast<int>(gamma.rows()); }
};

/// Wraps a factor-coefficient matrix (without the intercept column) into a
/// Design, enforcing the box constraint.
inline Design make_design(const DesignProblem& problem,
                          const Eigen::MatrixXd& factor_coeffs) {
  const BlockLayout layout = block_layout(problem);
  if (factor_coeffs.rows() != problem.n_runs ||
      factor_coeffs.cols() != layout.gamma_cols - 1)
    throw std::invalid_argument(
        "make_design: expected " + std::to_string(problem.n_runs) + " x " +
        std::to_string(layout.gamma_cols - 1) + " factor coefficients, got " +
        std::to_string(factor_coeffs.rows()) + " x " +
        std::to_string(factor_coeffs.cols()));
  if (factor_coeffs.size() > 0 &&
      factor_coeffs.cwiseAbs().maxCoeff() > problem.bound + 1e-12)
    throw std::invalid_argument("make_design: coefficient outside the [-bound, bound] box");
  Design design;
  design.gamma.resize(problem.n_runs, layout.gamma_cols);
  design.gamma.col(0).setOnes();
  design.gamma.rightCols(layout.gamma_cols - 1) = factor_coeffs;
  return design;
}

/// Block-diagonal J = diag(1, gram(c^1, eta^1), ..., gram(c^p, eta^p)), so
/// that Z = Gamma * J.
inline Eigen::MatrixXd assemble_J(const DesignProblem& problem) {
  const BlockLayout layout = block_layout(problem);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(layout.gamma_cols, layout.z_cols);
  j(0, 0) = 1.0;
  for (std::size_t i = 0; i < problem.factors.size(); ++i) {
    const BasisSystem factor_basis(problem.factors[i].factor_basis);
    const BasisSystem coeff_basis(problem.factors[i].coeff_basis);
    j.block(layout.factor_offset[i], layout.coeff_offset[i], layout.factor_dim[i],
            layout.coeff_dim[i]) = gram(factor_basis, coeff_basis);
  }
  return j;
}

/// M is treated as invertible iff its reciprocal condition number (ratio of
/// extreme eigenvalues) is at least this threshold.
inline constexpr double kFeasibilityRcond = 1e-12;

struct InformationSummary {
  Eigen::MatrixXd Z;
  Eigen::MatrixXd M;
  Eigen::VectorXd eigenvalues;  // of M, ascending
  double reciprocal_condition = 0.0;
  bool feasible = false;
};

/// Z = Gamma * J, M = Z' Z, with the spectrum of M (used by both criteria
/// and by the feasibility gate).
inline InformationSummary information(const Design& design, const Eigen::MatrixXd& j) {
  if (design.gamma.cols() != j.rows())
    throw std::invalid_argument("information: Gamma has " +
                                std::to_string(design.gamma.cols()) +
                                " columns but J has " + std::to_string(j.rows()) +
                                " rows");
  InformationSummary summary;
  summary.Z.noalias() = design.gamma * j;
  summary.M.noalias() = summary.Z.transpose() * summary.Z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(summary.M,
                                                     Eigen::EigenvaluesOnly);
  summary.eigenvalues = eig.eigenvalues();
  const double largest = summary.eigenvalues(summary.eigenvalues.size() - 1);
  const double smallest = summary.eigenvalues(0);
  summary.reciprocal_condition = largest > 0.0 ? smallest / largest : 0.0;
  summary.feasible = summary.reciprocal_condition >= kFeasibilityRcond;
  return summary;
}

/// tr(M^-1): sum of reciprocal eigenvalues, +inf when M is singular at
/// tolerance. Lower is better.
inline double a_value(const InformationSummary& summary) {
  if (!summary.feasible) return std::numeric_limits<double>::infinity();
  return summary.eigenvalues.cwiseInverse().sum();
}

/// det(M): product of eigenvalues, 0 when singular at tolerance. Higher is
/// better.
inline double d_value(const InformationSummary& summary) {
  if (!summary.feasible) return 0.0;
  return summary.eigenvalues.prod();
}

/// Criterion in minimization orientation: A-value, or the negated D-value.
/// Infeasible designs map to +inf under both criteria.
inline double criterion_from_summary(Criterion criterion,
                                     const InformationSummary& summary) {
  if (!summary.feasible) return std::numeric_limits<double>::infinity();
  return criterion == Criterion::A ? a_value(summary) : -d_value(summary);
}

inline double criterion_value(const DesignProblem& problem, const Design& design,
                              const Eigen::MatrixXd& j) {
  return criterion_from_summary(problem.criterion, information(design, j));
}

inline double criterion_value(const DesignProblem& problem, const Design& design) {
  return criterion_value(problem, design, assemble_J(problem));
}

/// Efficiencies relative to the best (smallest) A-value in the group.
inline std::vector<double> relative_efficiency(const std::vector<double>& values) {
  if (values.empty())
    throw std::invalid_argument("relative_efficiency: empty value list");
  double best = std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("relative_efficiency: values must be finite and positive");
    best = std::min(best, v);
  }
  std::vector<double> eff;
  eff.reserve(values.size());
  for (double v : values) eff.push_back(best / v);
  return eff;
}

}  // namespace fofdoe
