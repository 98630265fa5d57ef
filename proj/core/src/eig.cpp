#include "specfilt/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "specfilt/errors.hpp"

namespace specfilt {

namespace {

double offdiag_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

Spectrum symmetric_eig(const DenseMatrix& m, const EigOptions& opts) {
  const int n = m.rows;
  if (m.cols != n) throw std::invalid_argument("symmetric_eig: matrix not square");
  if (n > opts.max_n)
    throw std::invalid_argument("symmetric_eig: n=" + std::to_string(n) +
                                " exceeds oracle cap " + std::to_string(opts.max_n));
  const double scale = std::max(frobenius_norm(m), 1e-300);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(m(i, j) - m(j, i)) > opts.symmetry_tol * std::max(1.0, scale))
        throw std::invalid_argument("symmetric_eig: input not symmetric");

  DenseMatrix a = m;
  DenseMatrix v = DenseMatrix::identity(n);
  const double target = 1e-10 * scale;

  int sweep = 0;
  while (offdiag_norm(a) > target) {
    if (++sweep > opts.max_sweeps)
      throw NumericalError("symmetric_eig: no convergence after " +
                           std::to_string(opts.max_sweeps) + " sweeps");
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // rotation annihilating a(p,q)
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&a](int i, int j) { return a(i, i) < a(j, j); });

  Spectrum sp;
  sp.eigenvalues.resize(n);
  sp.eigenvectors = DenseMatrix(n, n);
  for (int c = 0; c < n; ++c) {
    sp.eigenvalues[c] = a(order[c], order[c]);
    for (int r = 0; r < n; ++r) sp.eigenvectors(r, c) = v(r, order[c]);
  }
  return sp;
}

}  // namespace specfilt
