#pragma once

#include <span>
#include <vector>

namespace specfilt {

/// Row-major dense matrix.
struct DenseMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;  // rows * cols

  DenseMatrix() = default;
  DenseMatrix(int r, int c, double fill = 0.0) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  static DenseMatrix identity(int n);

  std::vector<double> col(int j) const;
  std::vector<double> row(int i) const;
};

std::vector<double> matvec(const DenseMatrix& m, std::span<const double> x);
/// y = m^T x
std::vector<double> matvec_t(const DenseMatrix& m, std::span<const double> x);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
double frobenius_norm(const DenseMatrix& m);

}  // namespace specfilt
