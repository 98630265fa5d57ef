#pragma once

#include "specfilt/dense.hpp"

namespace specfilt {

/// Eigendecomposition of a symmetric matrix: eigenvalues ascending,
/// eigenvectors columns of an orthogonal matrix paired by index.
struct Spectrum {
  std::vector<double> eigenvalues;
  DenseMatrix eigenvectors;  // n x n, column i <-> eigenvalues[i]
};

struct EigOptions {
  int max_n = 2048;      // oracle cap; the dense path is not a production path
  int max_sweeps = 100;
  double symmetry_tol = 1e-10;
};

/// Cyclic Jacobi rotations. Reduces the off-diagonal Frobenius norm below
/// 1e-10 * ||m||_F. Throws std::invalid_argument on asymmetric or oversized
/// input, NumericalError on non-convergence.
Spectrum symmetric_eig(const DenseMatrix& m, const EigOptions& opts = {});

}  // namespace specfilt
