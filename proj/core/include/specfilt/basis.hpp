#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specfilt/dense.hpp"

namespace specfilt {

/// Coefficients of the orthonormal three-term recurrence
///   sqrt_beta[k+1] * p_{k+1}(x) = (x - gamma[k]) * p_k(x) - sqrt_beta[k] * p_{k-1}(x),
///   p_{-1} = 0, p_0 = 1 / sqrt_beta[0].
/// sqrt_beta has K+2 entries, gamma has K+1. All interior sqrt_beta must be
/// positive; the trailing sqrt_beta[K+1] is bookkeeping only and may vanish
/// when the underlying measure has exactly K+1 support points.
struct RecurrenceCoefficients {
  std::vector<double> sqrt_beta;
  std::vector<double> gamma;

  int order() const { return static_cast<int>(gamma.size()) - 1; }
  /// Checks sqrt_beta[0..order()] > 0 (the entries evaluation divides by).
  void validate() const;
  /// Rows 0..K of p_k evaluated at the given points.
  DenseMatrix evaluate(std::span<const double> points) const;
};

enum class BasisTag { Monomial, Chebyshev1, Jacobi, Favard, OptBasis, Bernstein };

/// Tagged basis selector. Jacobi carries (a, b), a,b > -1; Favard carries its
/// recurrence; Bernstein is parameterized by the truncation order alone.
struct BasisKind {
  BasisTag tag = BasisTag::Monomial;
  double jacobi_a = 0.0;
  double jacobi_b = 0.0;
  RecurrenceCoefficients favard;

  static BasisKind monomial() { return {BasisTag::Monomial}; }
  static BasisKind chebyshev() { return {BasisTag::Chebyshev1}; }
  static BasisKind jacobi(double a, double b);
  static BasisKind favard_basis(RecurrenceCoefficients rc);
  static BasisKind opt_basis() { return {BasisTag::OptBasis}; }
  static BasisKind bernstein() { return {BasisTag::Bernstein}; }

  std::string name() const;
};

/// Parse "monomial" / "chebyshev" / "bernstein" / "optbasis" / "favard" /
/// "jacobi(a,b)". Throws ConfigError on anything else.
BasisKind parse_basis(const std::string& s);

/// General three-term recurrence p_{k+1}(x) = (A_k x + B_k) p_k(x) + C_k p_{k-1}(x),
/// p_0 = 1. Classical bases (Monomial, Chebyshev, Jacobi) are not unit-norm
/// under the orthonormal convention, so they keep this general form.
struct GeneralRecurrence {
  std::vector<double> a, b, c;  // each K entries, producing p_1..p_K

  DenseMatrix evaluate(std::span<const double> points) const;
};

/// Recurrence for a named classical basis; empty for Bernstein (no
/// increasing-order three-term recurrence) and OptBasis (input-dependent).
std::optional<GeneralRecurrence> named_recurrence(const BasisKind& kind, int K);

/// (K+1) x |points| matrix of basis values. For Bernstein the points are
/// lambda in [0,2]; all other kinds take mu in [-1,1]. OptBasis is an error
/// here: its evaluation needs a measure (see the spectral oracle).
DenseMatrix eval_basis(const BasisKind& kind, int K, std::span<const double> points);

/// b_k(lambda) = C(K,k) 2^{-K} (2-lambda)^{K-k} lambda^k for k = 0..K.
DenseMatrix bernstein_values(int K, std::span<const double> lambda_points);

/// True iff every p_k in the evaluated family has exact degree k, decided by
/// order-(k+1) finite differences over K+2 equispaced samples.
bool basis_degree_check(const BasisKind& kind, int K);

double binomial(int n, int k);

}  // namespace specfilt
