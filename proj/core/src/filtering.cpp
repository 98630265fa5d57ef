#include "specfilt/filtering.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "specfilt/errors.hpp"
#include "specfilt/io.hpp"
#include "json.hpp"

namespace specfilt {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void check_finite(std::span<const double> v, int channel, int order_k) {
  for (double x : v)
    if (!std::isfinite(x))
      throw NumericalError("non-finite intermediate at channel " + std::to_string(channel) +
                           ", order " + std::to_string(order_k));
}

}  // namespace

SignalMatrix SignalMatrix::from_column(std::span<const double> x) {
  SignalMatrix s(static_cast<int>(x.size()), 1);
  std::copy(x.begin(), x.end(), s.data.begin());
  return s;
}

SignalMatrix favard_filtering(const SparseMatrix& p, const SignalMatrix& x,
                              const DenseMatrix& sqrt_beta, const DenseMatrix& gamma,
                              const CoefficientMatrix& alpha) {
  const int n = x.n;
  const int d = x.d;
  const int K = alpha.k_count - 1;
  if (p.n() != n || alpha.d != d || sqrt_beta.rows != d || gamma.rows != d ||
      sqrt_beta.cols != K + 2 || gamma.cols != K + 1)
    throw std::invalid_argument("favard_filtering: shape mismatch");
  for (int l = 0; l < d; ++l)
    for (int k = 0; k <= K + 1; ++k)
      if (!(sqrt_beta(l, k) > 0.0))
        throw std::invalid_argument("favard_filtering: sqrt_beta must be positive (channel " +
                                    std::to_string(l) + ", order " + std::to_string(k) + ")");

  SignalMatrix z(n, d);
  for (int l = 0; l < d; ++l) {
    std::vector<double> xk(x.col(l).begin(), x.col(l).end());
    for (double& v : xk) v /= sqrt_beta(l, 0);
    std::vector<double> xkm1(n, 0.0);
    auto zl = z.col(l);
    for (int i = 0; i < n; ++i) zl[i] = alpha.at(0, l) * xk[i];
    for (int k = 0; k < K; ++k) {
      auto t = spmv(p, xk);
      for (int i = 0; i < n; ++i)
        t[i] = (t[i] - gamma(l, k) * xk[i] - sqrt_beta(l, k) * xkm1[i]) / sqrt_beta(l, k + 1);
      check_finite(t, l, k + 1);
      xkm1.swap(xk);
      xk.swap(t);
      const double a = alpha.at(k + 1, l);
      for (int i = 0; i < n; ++i) zl[i] += a * xk[i];
    }
  }
  return z;
}

NextBasisResult next_basis_vector(const SparseMatrix& p, std::span<const double> v_k,
                                  std::span<const double> v_km1) {
  NextBasisResult r;
  auto vstar = spmv(p, v_k);
  r.gamma_k = dot(vstar, v_k);
  r.proj_prev = v_km1.empty() ? 0.0 : dot(vstar, v_km1);
  const int n = p.n();
  r.v_next.resize(n);
  for (int i = 0; i < n; ++i)
    r.v_next[i] = vstar[i] - r.gamma_k * v_k[i] - (v_km1.empty() ? 0.0 : r.proj_prev * v_km1[i]);
  r.sqrt_beta_next = norm(r.v_next);
  const double denom = std::max(r.sqrt_beta_next, kOptBasisNormFloor);
  for (double& v : r.v_next) v /= denom;
  return r;
}

std::pair<SignalMatrix, std::optional<BasisVectors>> optbasis_filtering(
    const SparseMatrix& p, const SignalMatrix& x, const CoefficientMatrix& alpha, int order,
    bool keep_vectors, std::vector<RecurrenceCoefficients>* recurrences, OptBasisDebug* debug) {
  const int n = x.n;
  const int d = x.d;
  if (p.n() != n || alpha.d != d || alpha.k_count != order + 1)
    throw std::invalid_argument("optbasis_filtering: shape mismatch");

  SignalMatrix z(n, d);
  std::optional<BasisVectors> vecs;
  if (keep_vectors) vecs.emplace(d, order, n);
  if (recurrences) recurrences->assign(d, {});

  for (int l = 0; l < d; ++l) {
    RecurrenceCoefficients rc;
    rc.sqrt_beta.resize(order + 2);
    rc.gamma.resize(order + 1);

    std::vector<double> vk(x.col(l).begin(), x.col(l).end());
    const double x_norm = norm(vk);
    rc.sqrt_beta[0] = x_norm;
    const double denom0 = std::max(x_norm, kOptBasisNormFloor);
    for (double& v : vk) v /= denom0;
    std::vector<double> vkm1;  // empty stands for v_{-1} = 0

    auto zl = z.col(l);
    for (int i = 0; i < n; ++i) zl[i] = alpha.at(0, l) * vk[i];
    if (keep_vectors) std::copy(vk.begin(), vk.end(), vecs->vec(l, 0).begin());

    double prev_residual_norm = 0.0;  // ||v_perp_k||, for the consistency check
    for (int k = 0; k < order; ++k) {
      auto step = next_basis_vector(p, vk, vkm1);
      rc.gamma[k] = step.gamma_k;
      rc.sqrt_beta[k + 1] = step.sqrt_beta_next;
      if (debug && k >= 1) debug->lemma_gaps.push_back(std::abs(prev_residual_norm - step.proj_prev));
      prev_residual_norm = step.sqrt_beta_next;
      vkm1 = std::move(vk);
      vk = std::move(step.v_next);
      check_finite(vk, l, k + 1);
      const double a = alpha.at(k + 1, l);
      for (int i = 0; i < n; ++i) zl[i] += a * vk[i];
      if (keep_vectors) std::copy(vk.begin(), vk.end(), vecs->vec(l, k + 1).begin());
    }
    // bookkeeping step: fills gamma[K] and sqrt_beta[K+1] without extending V
    auto tail = next_basis_vector(p, vk, vkm1);
    rc.gamma[order] = tail.gamma_k;
    rc.sqrt_beta[order + 1] = tail.sqrt_beta_next;
    if (debug && order >= 1) debug->lemma_gaps.push_back(std::abs(prev_residual_norm - tail.proj_prev));

    if (recurrences) (*recurrences)[l] = rc;
    if (keep_vectors) vecs->recurrence.push_back(rc);
  }
  return {std::move(z), std::move(vecs)};
}

std::pair<std::vector<double>, BasisVectors> full_gs_filtering(const SparseMatrix& p,
                                                               std::span<const double> x,
                                                               std::span<const double> alpha,
                                                               int order) {
  const int n = p.n();
  if (static_cast<int>(x.size()) != n || static_cast<int>(alpha.size()) != order + 1)
    throw std::invalid_argument("full_gs_filtering: shape mismatch");
  BasisVectors vecs(1, order, n);
  std::vector<double> z(n, 0.0);

  std::vector<double> v0(x.begin(), x.end());
  const double denom0 = std::max(norm(v0), kOptBasisNormFloor);
  for (double& v : v0) v /= denom0;
  std::copy(v0.begin(), v0.end(), vecs.vec(0, 0).begin());
  for (int i = 0; i < n; ++i) z[i] = alpha[0] * v0[i];

  for (int k = 0; k < order; ++k) {
    auto vstar = spmv(p, vecs.vec(0, k));
    for (int i = 0; i <= k; ++i) {
      auto vi = vecs.vec(0, i);
      const double proj = dot(vstar, vi);
      for (int j = 0; j < n; ++j) vstar[j] -= proj * vi[j];
    }
    const double denom = std::max(norm(vstar), kOptBasisNormFloor);
    for (double& v : vstar) v /= denom;
    std::copy(vstar.begin(), vstar.end(), vecs.vec(0, k + 1).begin());
    for (int i = 0; i < n; ++i) z[i] += alpha[k + 1] * vstar[i];
  }
  return {std::move(z), std::move(vecs)};
}

SignalMatrix fixed_basis_filtering(const SparseMatrix& p, const SignalMatrix& x,
                                   const BasisKind& kind, const CoefficientMatrix& alpha) {
  const int n = x.n;
  const int d = x.d;
  const int K = alpha.k_count - 1;
  if (p.n() != n || alpha.d != d) throw std::invalid_argument("fixed_basis_filtering: shape mismatch");
  if (kind.tag == BasisTag::OptBasis || kind.tag == BasisTag::Favard)
    throw std::invalid_argument("fixed_basis_filtering: use the dedicated " + kind.name() +
                                " operation");

  SignalMatrix z(n, d);
  if (kind.tag == BasisTag::Bernstein) {
    // z = 2^{-K} * Horner over M = 2I - L = I + P applied to powers of L = I - P
    const SparseMatrix lap = identity_plus_scaled(p, -1.0);
    const SparseMatrix two_minus_lap = identity_plus_scaled(p, +1.0);
    const double scale = std::pow(2.0, -K);
    for (int l = 0; l < d; ++l) {
      std::vector<std::vector<double>> powers(K + 1);
      powers[0].assign(x.col(l).begin(), x.col(l).end());
      for (int k = 1; k <= K; ++k) powers[k] = spmv(lap, powers[k - 1]);
      std::vector<double> acc(n, 0.0);
      for (int k = 0; k <= K; ++k) {
        if (k > 0) acc = spmv(two_minus_lap, acc);
        const double a = alpha.at(k, l) * binomial(K, k) * scale;
        for (int i = 0; i < n; ++i) acc[i] += a * powers[k][i];
      }
      std::copy(acc.begin(), acc.end(), z.col(l).begin());
    }
    return z;
  }

  const auto rec = named_recurrence(kind, K);
  if (!rec) throw std::invalid_argument("fixed_basis_filtering: basis has no vector recurrence");
  for (int l = 0; l < d; ++l) {
    std::vector<double> gk(x.col(l).begin(), x.col(l).end());  // g_0 = 1
    std::vector<double> gkm1(n, 0.0);
    auto zl = z.col(l);
    for (int i = 0; i < n; ++i) zl[i] = alpha.at(0, l) * gk[i];
    for (int k = 0; k < K; ++k) {
      auto t = spmv(p, gk);
      for (int i = 0; i < n; ++i)
        t[i] = rec->a[k] * t[i] + rec->b[k] * gk[i] + rec->c[k] * gkm1[i];
      check_finite(t, l, k + 1);
      gkm1.swap(gk);
      gk.swap(t);
      const double a = alpha.at(k + 1, l);
      for (int i = 0; i < n; ++i) zl[i] += a * gk[i];
    }
  }
  return z;
}

BasisVectors precompute_basis(const SparseMatrix& p, const SignalMatrix& x, int order) {
  CoefficientMatrix zero(x.d, order + 1);
  auto [z, vecs] = optbasis_filtering(p, x, zero, order, /*keep_vectors=*/true);
  return std::move(*vecs);
}

SignalMatrix combine_precomputed(const BasisVectors& v, const CoefficientMatrix& alpha,
                                 const std::vector<int>* batch) {
  if (alpha.d != v.d || alpha.k_count != v.order + 1)
    throw std::invalid_argument("combine_precomputed: shape mismatch");
  const int rows = batch ? static_cast<int>(batch->size()) : v.n;
  SignalMatrix z(rows, v.d);
  for (int l = 0; l < v.d; ++l) {
    auto zl = z.col(l);
    for (int r = 0; r < rows; ++r) {
      const int i = batch ? (*batch)[r] : r;
      if (i < 0 || i >= v.n) throw std::invalid_argument("combine_precomputed: bad node id");
      double acc = 0.0;
      for (int k = 0; k <= v.order; ++k) acc += alpha.at(k, l) * v.vec(l, k)[i];
      zl[r] = acc;
    }
  }
  return z;
}

void save_basis_vectors(const BasisVectors& v, const std::string& path) {
  write_doubles(path, v.data);
  std::ostringstream os;
  os << "{\n  \"schema_version\": 1,\n  \"d\": " << v.d << ",\n  \"K\": " << v.order
     << ",\n  \"N\": " << v.n << ",\n  \"graph_hash\": \"" << v.graph_hash_value << "\"";
  if (!v.recurrence.empty()) {
    os << ",\n  \"recurrence\": [";
    for (std::size_t l = 0; l < v.recurrence.size(); ++l) {
      const auto& rc = v.recurrence[l];
      os << (l ? ",\n    {" : "\n    {") << "\"sqrt_beta\": [";
      for (std::size_t k = 0; k < rc.sqrt_beta.size(); ++k)
        os << (k ? "," : "") << fmt17(rc.sqrt_beta[k]);
      os << "], \"gamma\": [";
      for (std::size_t k = 0; k < rc.gamma.size(); ++k) os << (k ? "," : "") << fmt17(rc.gamma[k]);
      os << "]}";
    }
    os << "\n  ]";
  }
  os << "\n}\n";
  write_text_file(path + ".json", os.str());
}

BasisVectors load_basis_vectors(const std::string& path, std::uint64_t expect_graph_hash) {
  nlohmann::json sidecar;
  try {
    sidecar = nlohmann::json::parse(read_text_file(path + ".json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(path + ".json: " + e.what());
  }
  BasisVectors v(sidecar.at("d").get<int>(), sidecar.at("K").get<int>(), sidecar.at("N").get<int>());
  v.graph_hash_value = std::stoull(sidecar.at("graph_hash").get<std::string>());
  if (v.graph_hash_value != expect_graph_hash)
    throw DataError(path + ": graph hash mismatch (precomputed for a different graph)");
  v.data = read_doubles(path, static_cast<std::size_t>(v.d) * (v.order + 1) * v.n);
  if (sidecar.contains("recurrence")) {
    for (const auto& rj : sidecar.at("recurrence")) {
      RecurrenceCoefficients rc;
      rc.sqrt_beta = rj.at("sqrt_beta").get<std::vector<double>>();
      rc.gamma = rj.at("gamma").get<std::vector<double>>();
      v.recurrence.push_back(std::move(rc));
    }
  }
  return v;
}

}  // namespace specfilt
