#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "specfilt/basis.hpp"
#include "specfilt/graph.hpp"

namespace specfilt {

/// N x d node signals, column-major (channels contiguous).
struct SignalMatrix {
  int n = 0;
  int d = 0;
  std::vector<double> data;  // data[l*n + i]

  SignalMatrix() = default;
  SignalMatrix(int n_, int d_) : n(n_), d(d_), data(static_cast<std::size_t>(n_) * d_, 0.0) {}

  double& at(int i, int l) { return data[static_cast<std::size_t>(l) * n + i]; }
  double at(int i, int l) const { return data[static_cast<std::size_t>(l) * n + i]; }
  std::span<double> col(int l) { return {data.data() + static_cast<std::size_t>(l) * n, static_cast<std::size_t>(n)}; }
  std::span<const double> col(int l) const { return {data.data() + static_cast<std::size_t>(l) * n, static_cast<std::size_t>(n)}; }

  static SignalMatrix from_column(std::span<const double> x);
};

/// Per-channel combination coefficients alpha_{k,l}, d x (K+1).
struct CoefficientMatrix {
  int d = 0;
  int k_count = 0;  // K+1

  std::vector<double> data;  // data[l*k_count + k]

  CoefficientMatrix() = default;
  CoefficientMatrix(int d_, int k_count_)
      : d(d_), k_count(k_count_), data(static_cast<std::size_t>(d_) * k_count_, 0.0) {}

  double& at(int k, int l) { return data[static_cast<std::size_t>(l) * k_count + k]; }
  double at(int k, int l) const { return data[static_cast<std::size_t>(l) * k_count + k]; }
};

/// Materialized basis vectors, d x (K+1) x N, with the accompanying
/// recurrence recorded per channel when produced by the optimal-basis path.
struct BasisVectors {
  int d = 0;
  int order = 0;  // K
  int n = 0;
  std::vector<double> data;  // data[(l*(K+1)+k)*n + i]
  std::vector<RecurrenceCoefficients> recurrence;  // per channel; may be empty
  std::uint64_t graph_hash_value = 0;

  BasisVectors() = default;
  BasisVectors(int d_, int order_, int n_)
      : d(d_), order(order_), n(n_),
        data(static_cast<std::size_t>(d_) * (order_ + 1) * n_, 0.0) {}

  std::span<double> vec(int l, int k) {
    return {data.data() + (static_cast<std::size_t>(l) * (order + 1) + k) * n,
            static_cast<std::size_t>(n)};
  }
  std::span<const double> vec(int l, int k) const {
    return {data.data() + (static_cast<std::size_t>(l) * (order + 1) + k) * n,
            static_cast<std::size_t>(n)};
  }
};

/// Norm floor applied when normalizing optimal-basis vectors; past Krylov
/// exhaustion the residual collapses and later vectors stay near zero
/// instead of erroring.
inline constexpr double kOptBasisNormFloor = 1e-8;
/// Floor applied to trainable sqrt-beta parameters at read time.
inline constexpr double kFavardSqrtBetaFloor = 1e-2;

/// Learnable-recurrence filtering: per channel l,
///   x_0 = x / sqrt_beta(0,l),
///   x_{k+1} = (P x_k - gamma(k,l) x_k - sqrt_beta(k,l) x_{k-1}) / sqrt_beta(k+1,l),
///   z = sum_k alpha(k,l) x_k.
/// sqrt_beta is d x (K+2), gamma d x (K+1), alpha d x (K+1).
SignalMatrix favard_filtering(const SparseMatrix& p, const SignalMatrix& x,
                              const DenseMatrix& sqrt_beta, const DenseMatrix& gamma,
                              const CoefficientMatrix& alpha);

struct NextBasisResult {
  std::vector<double> v_next;
  double gamma_k = 0.0;      // <P v_k, v_k>
  double sqrt_beta_next = 0.0;  // ||v_perp|| (unclamped)
  double proj_prev = 0.0;    // <P v_k, v_{k-1}>; analytically equals the previous residual norm
};

/// One step of the two-term orthogonalization: v* = P v_k, subtract the
/// projections onto v_k and v_{k-1}, normalize with the norm floor.
NextBasisResult next_basis_vector(const SparseMatrix& p, std::span<const double> v_k,
                                  std::span<const double> v_km1);

struct OptBasisDebug {
  /// |  ||v_perp_k|| - <v*_{k+1}, v_{k-1}>  | per recorded step.
  std::vector<double> lemma_gaps;
};

/// Optimal-basis filtering. Per channel: v_0 = x/||x||, K two-term steps,
/// z = sum_k alpha(k,l) v_k. Records the accompanying recurrence with
/// sqrt_beta[0] = ||x||; one extra bookkeeping step fills gamma[K] and
/// sqrt_beta[K+1]. Set keep_vectors to materialize V.
std::pair<SignalMatrix, std::optional<BasisVectors>> optbasis_filtering(
    const SparseMatrix& p, const SignalMatrix& x, const CoefficientMatrix& alpha, int order,
    bool keep_vectors, std::vector<RecurrenceCoefficients>* recurrences = nullptr,
    OptBasisDebug* debug = nullptr);

/// Single-channel oracle variant orthogonalizing against all previous
/// vectors (O(K|E| + K^2 N)); exists to check the two-term shortcut.
std::pair<std::vector<double>, BasisVectors> full_gs_filtering(const SparseMatrix& p,
                                                               std::span<const double> x,
                                                               std::span<const double> alpha,
                                                               int order);

/// Filtering with a named fixed basis (general three-term recurrence on
/// vectors) or Bernstein (Horner scheme in (2I - L)).
SignalMatrix fixed_basis_filtering(const SparseMatrix& p, const SignalMatrix& x,
                                   const BasisKind& kind, const CoefficientMatrix& alpha);

/// Materialize the optimal-basis vectors without applying alpha.
BasisVectors precompute_basis(const SparseMatrix& p, const SignalMatrix& x, int order);

/// Z[i,l] = sum_k alpha(k,l) V[l,k,i], optionally restricted to a node batch
/// (output rows follow batch order).
SignalMatrix combine_precomputed(const BasisVectors& v, const CoefficientMatrix& alpha,
                                 const std::vector<int>* batch = nullptr);

/// Binary layout: per-channel contiguous (K+1) x N little-endian doubles in
/// `path`, JSON sidecar (d, K, N, graph hash, per-channel recurrence) at
/// `path + ".json"`.
void save_basis_vectors(const BasisVectors& v, const std::string& path);
BasisVectors load_basis_vectors(const std::string& path, std::uint64_t expect_graph_hash);

}  // namespace specfilt
