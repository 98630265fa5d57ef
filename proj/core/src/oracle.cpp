#include "specfilt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "specfilt/errors.hpp"

namespace specfilt {

double DiscreteMeasure::total_mass() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

DiscreteMeasure spectral_weight_measure(const Spectrum& s, std::span<const double> x,
                                        double merge_tol) {
  const int n = static_cast<int>(s.eigenvalues.size());
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("spectral_weight_measure: signal dimension mismatch");
  const auto proj = matvec_t(s.eigenvectors, x);  // U^T x
  DiscreteMeasure m;
  for (int i = 0; i < n; ++i) {
    const double w = proj[i] * proj[i];
    if (!m.nodes.empty() && s.eigenvalues[i] - m.nodes.back() <= merge_tol) {
      m.weights.back() += w;
    } else {
      m.nodes.push_back(s.eigenvalues[i]);
      m.weights.push_back(w);
    }
  }
  if (m.total_mass() <= 1e-24) throw NumericalError("spectral_weight_measure: zero signal");
  return m;
}

RecurrenceCoefficients gram_schmidt_polynomials(const DiscreteMeasure& m, int K) {
  int support = 0;
  for (double w : m.weights)
    if (w > 0.0) ++support;
  if (support < K + 1)
    throw NumericalError("gram_schmidt_polynomials: measure supports order " +
                         std::to_string(support - 1) + ", requested " + std::to_string(K));
  const int np = m.support_size();
  RecurrenceCoefficients rc;
  rc.sqrt_beta.resize(K + 2);
  rc.gamma.resize(K + 1);

  const double mass = m.total_mass();
  rc.sqrt_beta[0] = std::sqrt(mass);
  std::vector<double> pk(np, 1.0 / rc.sqrt_beta[0]);
  std::vector<double> pkm1(np, 0.0);

  for (int k = 0; k <= K; ++k) {
    double g = 0.0;
    for (int i = 0; i < np; ++i) g += m.weights[i] * m.nodes[i] * pk[i] * pk[i];
    rc.gamma[k] = g;
    std::vector<double> t(np);
    double nrm2 = 0.0;
    for (int i = 0; i < np; ++i) {
      t[i] = (m.nodes[i] - g) * pk[i] - rc.sqrt_beta[k] * pkm1[i];
      nrm2 += m.weights[i] * t[i] * t[i];
    }
    const double sb = std::sqrt(std::max(nrm2, 0.0));
    rc.sqrt_beta[k + 1] = sb;
    if (k < K) {
      if (!(sb > 1e-14 * std::sqrt(mass)))
        throw NumericalError("gram_schmidt_polynomials: basis degenerates at order " +
                             std::to_string(k + 1));
      for (int i = 0; i < np; ++i) {
        const double v = t[i] / sb;
        pkm1[i] = pk[i];
        pk[i] = v;
      }
    }
  }
  return rc;
}

DenseMatrix hessian_matrix(const Spectrum& s, const DenseMatrix& basis_values,
                           std::span<const double> x) {
  const int n = static_cast<int>(s.eigenvalues.size());
  if (static_cast<int>(x.size()) != n || basis_values.cols != n)
    throw std::invalid_argument("hessian_matrix: dimension mismatch");
  const auto proj = matvec_t(s.eigenvectors, x);
  const int K1 = basis_values.rows;
  DenseMatrix h(K1, K1);
  for (int i = 0; i < n; ++i) {
    const double w = proj[i] * proj[i];
    for (int k1 = 0; k1 < K1; ++k1)
      for (int k2 = 0; k2 < K1; ++k2) h(k1, k2) += w * basis_values(k1, i) * basis_values(k2, i);
  }
  return h;
}

double condition_number(const DenseMatrix& h) {
  const auto sp = symmetric_eig(h);
  const double lo = sp.eigenvalues.front();
  const double hi = sp.eigenvalues.back();
  if (lo <= 1e-12 * hi) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

std::vector<double> exact_filter(const Spectrum& s, const std::function<double(double)>& h,
                                 std::span<const double> x) {
  const int n = static_cast<int>(s.eigenvalues.size());
  if (static_cast<int>(x.size()) != n)
    throw std::invalid_argument("exact_filter: signal dimension mismatch");
  auto proj = matvec_t(s.eigenvectors, x);
  for (int i = 0; i < n; ++i) proj[i] *= h(1.0 - s.eigenvalues[i]);
  return matvec(s.eigenvectors, proj);
}

DiscreteMeasure gauss_quadrature(const RecurrenceCoefficients& rc, int K) {
  if (rc.order() < K) throw std::invalid_argument("gauss_quadrature: recurrence shorter than K");
  for (int k = 0; k <= K; ++k)
    if (!(rc.sqrt_beta[k] > 0.0))
      throw std::invalid_argument("gauss_quadrature: sqrt_beta[" + std::to_string(k) +
                                  "] must be positive");
  DenseMatrix j(K + 1, K + 1);
  for (int k = 0; k <= K; ++k) {
    j(k, k) = rc.gamma[k];
    if (k > 0) {
      j(k - 1, k) = rc.sqrt_beta[k];
      j(k, k - 1) = rc.sqrt_beta[k];
    }
  }
  const auto sp = symmetric_eig(j);
  DiscreteMeasure m;
  m.nodes = sp.eigenvalues;
  m.weights.resize(K + 1);
  const double beta0 = rc.sqrt_beta[0] * rc.sqrt_beta[0];
  for (int i = 0; i <= K; ++i) {
    const double f = sp.eigenvectors(0, i);
    m.weights[i] = beta0 * f * f;
  }
  return m;
}

}  // namespace specfilt
