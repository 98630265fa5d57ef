#include <cmath>
#include <numeric>

#include "doctest.h"
#include "helpers.hpp"
#include "specfilt/errors.hpp"
#include "specfilt/oracle.hpp"

using namespace specfilt;

namespace {

Spectrum spectrum_of(const Graph& g) {
  return symmetric_eig(testutil::to_dense(normalized_adjacency(g)));
}

}  // namespace

TEST_CASE("spectral weight measure mass equals the squared signal norm") {
  Rng rng(21);
  const Graph g = testutil::random_connected_graph(14, rng);
  const Spectrum s = spectrum_of(g);
  const auto x = testutil::random_signal(14, rng);
  const DiscreteMeasure m = spectral_weight_measure(s, x);
  const double xx = std::inner_product(x.begin(), x.end(), x.begin(), 0.0);
  CHECK(m.total_mass() == doctest::Approx(xx).epsilon(1e-12));
  for (double w : m.weights) CHECK(w >= 0.0);
}

TEST_CASE("zero signal rejected") {
  const Graph g = Graph::make(3, {{0, 1}, {1, 2}});
  const Spectrum s = spectrum_of(g);
  const std::vector<double> zero(3, 0.0);
  CHECK_THROWS_AS(spectral_weight_measure(s, zero), NumericalError);
}

TEST_CASE("stieltjes recurrence produces orthonormal polynomials under the measure") {
  Rng rng(33);
  const Graph g = testutil::random_connected_graph(20, rng);
  const Spectrum s = spectrum_of(g);
  const auto x = testutil::random_signal(20, rng);
  const DiscreteMeasure m = spectral_weight_measure(s, x);
  const int K = 6;
  const RecurrenceCoefficients rc = gram_schmidt_polynomials(m, K);
  const DenseMatrix v = rc.evaluate(m.nodes);
  for (int a = 0; a <= K; ++a)
    for (int b = 0; b <= K; ++b) {
      double ip = 0;
      for (int i = 0; i < m.support_size(); ++i) ip += v(a, i) * v(b, i) * m.weights[i];
      CHECK(ip == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-9));
    }
}

TEST_CASE("stieltjes needs enough support") {
  DiscreteMeasure m;
  m.nodes = {-0.5, 0.0, 0.5};
  m.weights = {1.0, 1.0, 1.0};
  CHECK_NOTHROW(gram_schmidt_polynomials(m, 2));
  CHECK_THROWS_AS(gram_schmidt_polynomials(m, 3), NumericalError);
}

TEST_CASE("hessian and condition number on a known measure") {
  // Uniform-weight two-point measure, monomial basis K=1:
  // H = [[m0, m1], [m1, m2]] with moments of the measure.
  Spectrum s;
  s.eigenvalues = {-0.5, 0.5};
  s.eigenvectors = DenseMatrix::identity(2);
  const std::vector<double> x{1.0, 1.0};  // weights 1 at both atoms
  const DenseMatrix vals = eval_basis(BasisKind::monomial(), 1, s.eigenvalues);
  const DenseMatrix h = hessian_matrix(s, vals, x);
  CHECK(h(0, 0) == doctest::Approx(2.0));
  CHECK(h(0, 1) == doctest::Approx(0.0));
  CHECK(h(1, 1) == doctest::Approx(0.5));
  CHECK(condition_number(h) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(condition_number(DenseMatrix::identity(5)) == doctest::Approx(1.0));
}

TEST_CASE("exact filter with identity response returns the signal") {
  Rng rng(9);
  const Graph g = testutil::random_connected_graph(10, rng);
  const Spectrum s = spectrum_of(g);
  const auto x = testutil::random_signal(10, rng);
  const auto y = exact_filter(s, [](double) { return 1.0; }, x);
  for (int i = 0; i < 10; ++i) CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-10));
}

TEST_CASE("exact filter diagonalizes polynomials of the operator") {
  // h(lambda) = (1 - lambda)^2 = mu^2 acting as P^2
  Rng rng(13);
  const Graph g = testutil::random_connected_graph(11, rng);
  const SparseMatrix p = normalized_adjacency(g);
  const Spectrum s = symmetric_eig(testutil::to_dense(p));
  const auto x = testutil::random_signal(11, rng);
  const auto y = exact_filter(s, [](double l) { return (1 - l) * (1 - l); }, x);
  const auto pp = spmv(p, spmv(p, x));
  for (int i = 0; i < 11; ++i) CHECK(y[i] == doctest::Approx(pp[i]).epsilon(1e-9));
}

TEST_CASE("gauss quadrature integrates polynomials exactly") {
  Rng rng(17);
  const Graph g = testutil::random_connected_graph(16, rng);
  const Spectrum s = spectrum_of(g);
  const auto x = testutil::random_signal(16, rng);
  const DiscreteMeasure m = spectral_weight_measure(s, x);
  const int K = 5;
  const RecurrenceCoefficients rc = gram_schmidt_polynomials(m, K);
  const DiscreteMeasure q = gauss_quadrature(rc, K);
  // Gauss rule with K+1 nodes is exact through degree 2K+1
  for (int deg = 0; deg <= 2 * K + 1; ++deg) {
    double exact = 0, quad = 0;
    for (int i = 0; i < m.support_size(); ++i) exact += std::pow(m.nodes[i], deg) * m.weights[i];
    for (int i = 0; i < q.support_size(); ++i) quad += std::pow(q.nodes[i], deg) * q.weights[i];
    CHECK(quad == doctest::Approx(exact).epsilon(1e-8));
  }
}
