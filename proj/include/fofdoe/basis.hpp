// Basis systems on the unit interval: B-splines of arbitrary degree on
// equidistant breakpoints, and Fourier families orthonormal in L2[0,1].
// Gram matrices of basis pairs are integrated exactly by piecewise
// Gauss-Legendre quadrature.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace fofdoe {

enum class BasisFamily { BSpline, Fourier };

inline std::string to_string(BasisFamily family) {
  return family == BasisFamily::BSpline ? "bspline" : "fourier";
}

/// Declarative description of a basis system.
///
/// B-splines are parameterized by degree D >= 0 and the number of
/// equidistant breakpoints K >= 2 (endpoints included), giving dimension
/// D + K - 1. Fourier systems are parameterized by their size L >= 1
/// (constant term followed by sin/cos pairs, odd L recommended).
struct BasisSpec {
  BasisFamily family = BasisFamily::BSpline;
  int degree = 0;       // B-spline only
  int breakpoints = 2;  // B-spline only
  int size = 1;         // Fourier only

  static BasisSpec bspline(int degree, int breakpoints) {
    BasisSpec spec;
    spec.family = BasisFamily::BSpline;
    spec.degree = degree;
    spec.breakpoints = breakpoints;
    return spec;
  }

  static BasisSpec fourier(int size) {
    BasisSpec spec;
    spec.family = BasisFamily::Fourier;
    spec.size = size;
    return spec;
  }

  int dimension() const {
    return family == BasisFamily::BSpline ? degree + breakpoints - 1 : size;
  }

  void validate() const {
    if (family == BasisFamily::BSpline) {
      if (degree < 0)
        throw std::invalid_argument("BasisSpec: degree must be >= 0, got " +
                                    std::to_string(degree));
      if (breakpoints < 2)
        throw std::invalid_argument("BasisSpec: breakpoints must be >= 2, got " +
                                    std::to_string(breakpoints));
    } else {
      if (size < 1)
        throw std::invalid_argument("BasisSpec: size must be >= 1, got " +
                                    std::to_string(size));
    }
  }

  bool operator==(const BasisSpec&) const = default;
};

/// An evaluable basis system on [0,1].
///
/// B-spline systems use a clamped knot vector (endpoint multiplicity D+1,
/// simple interior knots at j/(K-1)), evaluated with the de Boor
/// triangular recurrence. Evaluation at s=1 follows the right-closed
/// convention so the family is a partition of unity on the closed
/// interval. Fourier systems are 1, sqrt(2)*sin(2*pi*k*s),
/// sqrt(2)*cos(2*pi*k*s), ... and satisfy gram(f,f) = I.
class BasisSystem {
 public:
  explicit BasisSystem(const BasisSpec& spec) : spec_(spec) {
    spec.validate();
    dimension_ = spec.dimension();
    if (spec_.family == BasisFamily::BSpline) {
      const int d = spec_.degree;
      const int k = spec_.breakpoints;
      knots_.reserve(dimension_ + d + 1);
      for (int i = 0; i <= d; ++i) knots_.push_back(0.0);
      for (int j = 1; j <= k - 2; ++j)
        knots_.push_back(static_cast<double>(j) / (k - 1));
      for (int i = 0; i <= d; ++i) knots_.push_back(1.0);
    }
  }

  const BasisSpec& spec() const { return spec_; }
  int dimension() const { return dimension_; }

  /// Clamped knot vector; empty for Fourier systems.
  const std::vector<double>& knots() const { return knots_; }

  /// Unique breakpoints used to split integration domains. Fourier systems
  /// report a uniform refinement fine enough for their highest frequency.
  std::vector<double> integration_breakpoints() const {
    std::vector<double> cuts;
    if (spec_.family == BasisFamily::BSpline) {
      const int k = spec_.breakpoints;
      for (int j = 0; j < k; ++j)
        cuts.push_back(static_cast<double>(j) / (k - 1));
    } else {
      const int pieces = std::max(1, spec_.size);
      for (int j = 0; j <= pieces; ++j)
        cuts.push_back(static_cast<double>(j) / pieces);
    }
    return cuts;
  }

  /// Evaluate all basis functions at s in [0,1].
  Eigen::VectorXd eval(double s) const {
    if (!(s >= 0.0 && s <= 1.0))
      throw std::domain_error("BasisSystem::eval: s = " + std::to_string(s) +
                              " outside [0,1]");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(dimension_);
    if (spec_.family == BasisFamily::Fourier) {
      out(0) = 1.0;
      const double root2 = std::numbers::sqrt2;
      for (int idx = 1; idx < dimension_; ++idx) {
        const int freq = (idx + 1) / 2;
        const double arg = 2.0 * std::numbers::pi * freq * s;
        out(idx) = (idx % 2 == 1) ? root2 * std::sin(arg) : root2 * std::cos(arg);
      }
      return out;
    }

    const int d = spec_.degree;
    const int k = spec_.breakpoints;
    // Interval index on the equidistant grid; s=1 maps to the last interval.
    int cell = std::min(static_cast<int>(s * (k - 1)), k - 2);
    if (s < knots_[d + cell]) --cell;  // guard against rounding at breakpoints
    const int span = d + cell;

    // de Boor triangular recurrence for the d+1 nonzero functions.
    std::vector<double> left(d + 1), right(d + 1), vals(d + 1);
    vals[0] = 1.0;
    for (int j = 1; j <= d; ++j) {
      left[j] = s - knots_[span + 1 - j];
      right[j] = knots_[span + j] - s;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double tmp = vals[r] / (right[r + 1] + left[j - r]);
        vals[r] = saved + right[r + 1] * tmp;
        saved = left[j - r] * tmp;
      }
      vals[j] = saved;
    }
    for (int r = 0; r <= d; ++r) out(span - d + r) = vals[r];
    return out;
  }

 private:
  BasisSpec spec_;
  int dimension_ = 0;
  std::vector<double> knots_;
};

inline BasisSystem build_basis(const BasisSpec& spec) { return BasisSystem(spec); }

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1,1].
/// Computed by Newton iteration on the Legendre polynomial and cached.
inline const std::vector<std::pair<double, double>>& gauss_legendre(int n) {
  static std::vector<std::vector<std::pair<double, double>>> cache;
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  if (static_cast<int>(cache.size()) <= n) cache.resize(n + 1);
  if (!cache[n].empty()) return cache[n];

  std::vector<std::pair<double, double>> rule(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence: evaluates P_n(x) and its derivative.
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule[i] = {x, 2.0 / ((1.0 - x * x) * dp * dp)};
  }
  cache[n] = std::move(rule);
  return cache[n];
}

/// Gram matrix G(j,k) = integral over [0,1] of a_j(s) * b_k(s) ds.
///
/// The integrand is integrated piecewise over the merged breakpoint sets
/// of both systems. For B-spline pairs the node count ceil((Da+Db)/2)+1
/// makes the rule exact for the polynomial product; pairs involving a
/// Fourier system use 16 nodes per piece, which resolves at most one
/// oscillation period per piece to well below 1e-14.
inline Eigen::MatrixXd gram(const BasisSystem& a, const BasisSystem& b) {
  std::vector<double> cuts = a.integration_breakpoints();
  const std::vector<double> more = b.integration_breakpoints();
  cuts.insert(cuts.end(), more.begin(), more.end());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double x, double y) { return std::abs(x - y) < 1e-13; }),
             cuts.end());

  const bool polynomial = a.spec().family == BasisFamily::BSpline &&
                          b.spec().family == BasisFamily::BSpline;
  const int nodes =
      polynomial ? (a.spec().degree + b.spec().degree + 1) / 2 + 1 : 16;
  const auto& rule = gauss_legendre(nodes);

  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(a.dimension(), b.dimension());
  for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
    const double lo = cuts[p], hi = cuts[p + 1];
    const double half = 0.5 * (hi - lo), mid = 0.5 * (hi + lo);
    if (half <= 0.0) continue;
    for (const auto& [node, weight] : rule) {
      const double s = std::clamp(mid + half * node, 0.0, 1.0);
      g.noalias() += (half * weight) * (a.eval(s) * b.eval(s).transpose());
    }
  }
  return g;
}

/// True iff every breakpoint of the coefficient basis is also a breakpoint
/// of the factor basis, i.e. (Kx - 1) is a multiple of (Kbeta - 1).
inline bool knot_nesting(const BasisSpec& coeff_spec, const BasisSpec& factor_spec) {
  if (coeff_spec.family != BasisFamily::BSpline ||
      factor_spec.family != BasisFamily::BSpline)
    throw std::invalid_argument("knot_nesting: only B-spline bases have knot vectors");
  coeff_spec.validate();
  factor_spec.validate();
  return (factor_spec.breakpoints - 1) % (coeff_spec.breakpoints - 1) == 0;
}

}  // namespace fofdoe
