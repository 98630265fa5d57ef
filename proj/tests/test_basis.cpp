#include <cmath>
#include <vector>

#include "doctest.h"
#include "specfilt/basis.hpp"
#include "specfilt/errors.hpp"

using namespace specfilt;

TEST_CASE("parse_basis round trips") {
  CHECK(parse_basis("monomial").tag == BasisTag::Monomial);
  CHECK(parse_basis("chebyshev").tag == BasisTag::Chebyshev1);
  CHECK(parse_basis("bernstein").tag == BasisTag::Bernstein);
  CHECK(parse_basis("optbasis").tag == BasisTag::OptBasis);
  const BasisKind j = parse_basis("jacobi(1.5,0.5)");
  CHECK(j.tag == BasisTag::Jacobi);
  CHECK(j.jacobi_a == doctest::Approx(1.5));
  CHECK(j.jacobi_b == doctest::Approx(0.5));
  CHECK_THROWS_AS(parse_basis("legendre"), ConfigError);
  CHECK_THROWS_AS(parse_basis("jacobi(-2,0)"), ConfigError);
}

TEST_CASE("monomial recurrence gives powers") {
  const std::vector<double> pts{-0.9, -0.3, 0.2, 0.8};
  const DenseMatrix v = eval_basis(BasisKind::monomial(), 4, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int k = 0; k <= 4; ++k)
      CHECK(v(k, static_cast<int>(i)) == doctest::Approx(std::pow(pts[i], k)).epsilon(1e-13));
}

TEST_CASE("chebyshev values match cos(k arccos x)") {
  const std::vector<double> pts{-0.95, -0.4, 0.0, 0.33, 0.99};
  const DenseMatrix v = eval_basis(BasisKind::chebyshev(), 6, pts);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int k = 0; k <= 6; ++k)
      CHECK(v(k, static_cast<int>(i)) ==
            doctest::Approx(std::cos(k * std::acos(pts[i]))).epsilon(1e-11));
}

TEST_CASE("bernstein partition of unity and endpoints") {
  const int K = 7;
  std::vector<double> pts;
  for (int i = 0; i <= 20; ++i) pts.push_back(2.0 * i / 20.0);
  const DenseMatrix v = bernstein_values(K, pts);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    double sum = 0;
    for (int k = 0; k <= K; ++k) sum += v(k, static_cast<int>(i));
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(v(0, 0) == doctest::Approx(1.0));       // lambda = 0
  CHECK(v(K, 20) == doctest::Approx(1.0));      // lambda = 2
  CHECK(v(3, 0) == doctest::Approx(0.0));
}

TEST_CASE("orthonormal recurrence evaluation: chebyshev-like coefficients") {
  // Orthonormal Chebyshev on [-1,1] w.r.t. the arcsine measure:
  // sqrt_beta = (sqrt(pi), sqrt(1/2), 1/2, 1/2, ...), gamma = 0.
  const int K = 5;
  RecurrenceCoefficients rc;
  rc.gamma.assign(K + 1, 0.0);
  rc.sqrt_beta.assign(K + 2, 0.5);
  rc.sqrt_beta[0] = std::sqrt(3.14159265358979323846);
  rc.sqrt_beta[1] = std::sqrt(0.5);
  const std::vector<double> pts{-0.8, -0.1, 0.4, 0.9};
  const DenseMatrix v = rc.evaluate(pts);
  const double c0 = 1.0 / rc.sqrt_beta[0];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(v(0, static_cast<int>(i)) == doctest::Approx(c0).epsilon(1e-13));
    for (int k = 1; k <= K; ++k) {
      const double expect = c0 * std::sqrt(2.0) * std::cos(k * std::acos(pts[i]));
      CHECK(v(k, static_cast<int>(i)) == doctest::Approx(expect).epsilon(1e-10));
    }
  }
}

TEST_CASE("recurrence validation") {
  RecurrenceCoefficients rc;
  rc.gamma.assign(3, 0.0);
  rc.sqrt_beta.assign(4, 1.0);
  CHECK_NOTHROW(rc.validate());
  rc.sqrt_beta[1] = 0.0;
  CHECK_THROWS_AS(rc.validate(), std::invalid_argument);
  rc.sqrt_beta[1] = 1.0;
  rc.sqrt_beta[3] = 0.0;  // trailing entry is bookkeeping only
  CHECK_NOTHROW(rc.validate());
}

TEST_CASE("degree check accepts classical bases and rejects bernstein") {
  CHECK(basis_degree_check(BasisKind::monomial(), 6));
  CHECK(basis_degree_check(BasisKind::chebyshev(), 6));
  CHECK(basis_degree_check(BasisKind::jacobi(1.0, 1.0), 6));
  // every Bernstein component has full degree K, not degree k
  CHECK_FALSE(basis_degree_check(BasisKind::bernstein(), 6));
}

TEST_CASE("eval_basis rejects the input-dependent basis") {
  const std::vector<double> pts{0.0};
  CHECK_THROWS_AS(eval_basis(BasisKind::opt_basis(), 2, pts), std::invalid_argument);
}

TEST_CASE("binomial") {
  CHECK(binomial(6, 3) == doctest::Approx(20.0));
  CHECK(binomial(10, 0) == doctest::Approx(1.0));
  CHECK(binomial(10, 10) == doctest::Approx(1.0));
}
