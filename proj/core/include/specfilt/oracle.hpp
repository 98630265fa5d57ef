#pragma once

#include <functional>
#include <span>
#include <vector>

#include "specfilt/basis.hpp"
#include "specfilt/dense.hpp"
#include "specfilt/eig.hpp"
#include "specfilt/graph.hpp"

namespace specfilt {

/// Discrete measure on the real line: atoms at `nodes` with non-negative
/// `weights`.
struct DiscreteMeasure {
  std::vector<double> nodes;
  std::vector<double> weights;

  double total_mass() const;
  int support_size() const { return static_cast<int>(nodes.size()); }
};

/// Spectral weight measure of signal x: atoms at the eigenvalues mu_i with
/// weights (U^T x)_i^2. Atoms within merge_tol of each other are merged by
/// summing weights. Throws NumericalError on a (near-)zero signal.
DiscreteMeasure spectral_weight_measure(const Spectrum& s, std::span<const double> x,
                                        double merge_tol = 1e-9);

/// Stieltjes construction of the orthonormal-polynomial recurrence for a
/// discrete measure. Requires at least K+1 positively weighted support
/// points; throws NumericalError naming the failing order otherwise.
/// The trailing sqrt_beta[K+1] may be zero when the support is exactly K+1.
RecurrenceCoefficients gram_schmidt_polynomials(const DiscreteMeasure& m, int K);

/// H[k1,k2] = sum_i g_{k1}(mu_i) g_{k2}(mu_i) (U^T x)_i^2, the Hessian of the
/// coefficient-learning quadratic. basis_values row k holds g_k at every mu_i.
DenseMatrix hessian_matrix(const Spectrum& s, const DenseMatrix& basis_values,
                           std::span<const double> x);

/// Ratio of extreme eigenvalues of a symmetric PSD matrix; +inf when the
/// smallest is below 1e-12 of the largest.
double condition_number(const DenseMatrix& h);

/// U diag(h(1 - mu_i)) U^T x: exact spectral filtering, the ground truth
/// generator for the filter-learning experiments.
std::vector<double> exact_filter(const Spectrum& s, const std::function<double(double)>& h,
                                 std::span<const double> x);

/// Golub-Welsch: eigendecomposition of the (K+1)x(K+1) Jacobi operator built
/// from the recurrence. Nodes are its eigenvalues; weights are beta_0 times
/// the squared first eigenvector components.
DiscreteMeasure gauss_quadrature(const RecurrenceCoefficients& rc, int K);

}  // namespace specfilt
