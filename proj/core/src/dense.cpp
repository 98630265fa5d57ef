#include "specfilt/dense.hpp"

#include <cmath>
#include <stdexcept>

namespace specfilt {

DenseMatrix DenseMatrix::identity(int n) {
  DenseMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> DenseMatrix::col(int j) const {
  std::vector<double> v(rows);
  for (int i = 0; i < rows; ++i) v[i] = (*this)(i, j);
  return v;
}

std::vector<double> DenseMatrix::row(int i) const {
  return {data.begin() + static_cast<std::ptrdiff_t>(i) * cols,
          data.begin() + static_cast<std::ptrdiff_t>(i + 1) * cols};
}

std::vector<double> matvec(const DenseMatrix& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.cols) throw std::invalid_argument("matvec shape mismatch");
  std::vector<double> y(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < m.cols; ++j) acc += m(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

std::vector<double> matvec_t(const DenseMatrix& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.rows) throw std::invalid_argument("matvec_t shape mismatch");
  std::vector<double> y(m.cols, 0.0);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) y[j] += m(i, j) * x[i];
  return y;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul shape mismatch");
  DenseMatrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int k = 0; k < a.cols; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

double frobenius_norm(const DenseMatrix& m) {
  double s = 0.0;
  for (double v : m.data) s += v * v;
  return std::sqrt(s);
}

}  // namespace specfilt
