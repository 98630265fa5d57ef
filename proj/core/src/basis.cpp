#include "specfilt/basis.hpp"

#include <cmath>
#include <stdexcept>

#include "specfilt/errors.hpp"

namespace specfilt {

void RecurrenceCoefficients::validate() const {
  const int K = order();
  if (static_cast<int>(sqrt_beta.size()) != K + 2)
    throw std::invalid_argument("recurrence: sqrt_beta must have K+2 entries");
  for (int k = 0; k <= K; ++k)
    if (!(sqrt_beta[k] > 0.0))
      throw std::invalid_argument("recurrence: sqrt_beta[" + std::to_string(k) +
                                  "] must be positive");
}

DenseMatrix RecurrenceCoefficients::evaluate(std::span<const double> points) const {
  validate();
  const int K = order();
  const int np = static_cast<int>(points.size());
  DenseMatrix out(K + 1, np);
  for (int j = 0; j < np; ++j) {
    double pm1 = 0.0;
    double p = 1.0 / sqrt_beta[0];
    out(0, j) = p;
    for (int k = 0; k < K; ++k) {
      const double pn = ((points[j] - gamma[k]) * p - sqrt_beta[k] * pm1) / sqrt_beta[k + 1];
      pm1 = p;
      p = pn;
      out(k + 1, j) = p;
    }
  }
  return out;
}

BasisKind BasisKind::jacobi(double a, double b) {
  if (!(a > -1.0) || !(b > -1.0))
    throw std::invalid_argument("jacobi basis requires a > -1 and b > -1");
  BasisKind k;
  k.tag = BasisTag::Jacobi;
  k.jacobi_a = a;
  k.jacobi_b = b;
  return k;
}

BasisKind BasisKind::favard_basis(RecurrenceCoefficients rc) {
  BasisKind k;
  k.tag = BasisTag::Favard;
  k.favard = std::move(rc);
  return k;
}

std::string BasisKind::name() const {
  switch (tag) {
    case BasisTag::Monomial: return "monomial";
    case BasisTag::Chebyshev1: return "chebyshev";
    case BasisTag::Jacobi:
      return "jacobi(" + std::to_string(jacobi_a) + "," + std::to_string(jacobi_b) + ")";
    case BasisTag::Favard: return "favard";
    case BasisTag::OptBasis: return "optbasis";
    case BasisTag::Bernstein: return "bernstein";
  }
  return "?";
}

BasisKind parse_basis(const std::string& s) {
  if (s == "monomial") return BasisKind::monomial();
  if (s == "chebyshev") return BasisKind::chebyshev();
  if (s == "bernstein") return BasisKind::bernstein();
  if (s == "optbasis") return BasisKind::opt_basis();
  if (s == "favard") return BasisKind::favard_basis({});
  if (s.rfind("jacobi(", 0) == 0 && s.back() == ')') {
    const auto body = s.substr(7, s.size() - 8);
    const auto comma = body.find(',');
    if (comma != std::string::npos) {
      try {
        return BasisKind::jacobi(std::stod(body.substr(0, comma)), std::stod(body.substr(comma + 1)));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("bad jacobi parameters: ") + e.what());
      }
    }
  }
  throw ConfigError("unknown basis '" + s + "'");
}

DenseMatrix GeneralRecurrence::evaluate(std::span<const double> points) const {
  const int K = static_cast<int>(a.size());
  const int np = static_cast<int>(points.size());
  DenseMatrix out(K + 1, np);
  for (int j = 0; j < np; ++j) {
    double pm1 = 0.0;
    double p = 1.0;
    out(0, j) = p;
    for (int k = 0; k < K; ++k) {
      const double pn = (a[k] * points[j] + b[k]) * p + c[k] * pm1;
      pm1 = p;
      p = pn;
      out(k + 1, j) = p;
    }
  }
  return out;
}

std::optional<GeneralRecurrence> named_recurrence(const BasisKind& kind, int K) {
  if (K < 0) throw std::invalid_argument("named_recurrence: K must be >= 0");
  GeneralRecurrence r;
  r.a.resize(K);
  r.b.resize(K);
  r.c.resize(K);
  switch (kind.tag) {
    case BasisTag::Monomial:
      for (int k = 0; k < K; ++k) {
        r.a[k] = 1.0;
        r.b[k] = 0.0;
        r.c[k] = 0.0;
      }
      return r;
    case BasisTag::Chebyshev1:
      for (int k = 0; k < K; ++k) {
        r.a[k] = (k == 0) ? 1.0 : 2.0;
        r.b[k] = 0.0;
        r.c[k] = (k == 0) ? 0.0 : -1.0;
      }
      return r;
    case BasisTag::Jacobi: {
      const double al = kind.jacobi_a;
      const double be = kind.jacobi_b;
      for (int k = 0; k < K; ++k) {
        const int n = k + 1;  // producing P_n
        if (n == 1) {
          r.a[k] = 0.5 * (al + be + 2.0);
          r.b[k] = 0.5 * (al - be);
          r.c[k] = 0.0;
        } else {
          const double s = 2.0 * n + al + be;
          const double denom = 2.0 * n * (n + al + be) * (s - 2.0);
          r.a[k] = (s - 1.0) * s * (s - 2.0) / denom;
          r.b[k] = (s - 1.0) * (al * al - be * be) / denom;
          r.c[k] = -2.0 * (n + al - 1.0) * (n + be - 1.0) * s / denom;
        }
      }
      return r;
    }
    case BasisTag::Favard: {
      // Orthonormal form expressed as a general recurrence; note p_0 != 1 is
      // handled by the caller through RecurrenceCoefficients::evaluate.
      return std::nullopt;
    }
    case BasisTag::OptBasis:
    case BasisTag::Bernstein:
      return std::nullopt;
  }
  return std::nullopt;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

DenseMatrix bernstein_values(int K, std::span<const double> lambda_points) {
  const int np = static_cast<int>(lambda_points.size());
  DenseMatrix out(K + 1, np);
  const double scale = std::pow(2.0, -K);
  for (int k = 0; k <= K; ++k) {
    const double ck = binomial(K, k) * scale;
    for (int j = 0; j < np; ++j) {
      const double l = lambda_points[j];
      out(k, j) = ck * std::pow(2.0 - l, K - k) * std::pow(l, k);
    }
  }
  return out;
}

DenseMatrix eval_basis(const BasisKind& kind, int K, std::span<const double> points) {
  switch (kind.tag) {
    case BasisTag::OptBasis:
      throw std::invalid_argument(
          "optbasis has no standalone evaluation: it depends on a spectral measure");
    case BasisTag::Bernstein:
      return bernstein_values(K, points);
    case BasisTag::Favard: {
      if (kind.favard.order() < K)
        throw std::invalid_argument("favard recurrence shorter than requested order");
      auto full = kind.favard.evaluate(points);
      if (full.rows == K + 1) return full;
      DenseMatrix out(K + 1, full.cols);
      for (int k = 0; k <= K; ++k)
        for (int j = 0; j < full.cols; ++j) out(k, j) = full(k, j);
      return out;
    }
    default: {
      auto rec = named_recurrence(kind, K);
      return rec->evaluate(points);
    }
  }
}

bool basis_degree_check(const BasisKind& kind, int K) {
  // Sample on K+2 equispaced points; the order-(k+1) forward difference of a
  // degree-k polynomial vanishes, and the order-k one does not.
  const int np = K + 2;
  std::vector<double> pts(np);
  const double lo = (kind.tag == BasisTag::Bernstein) ? 0.0 : -1.0;
  const double hi = (kind.tag == BasisTag::Bernstein) ? 2.0 : 1.0;
  for (int j = 0; j < np; ++j) pts[j] = lo + (hi - lo) * j / (np - 1);
  const DenseMatrix vals = eval_basis(kind, K, pts);
  for (int k = 0; k <= K; ++k) {
    std::vector<double> d = vals.row(k);
    double maxabs = 1.0;
    for (double v : d) maxabs = std::max(maxabs, std::abs(v));
    for (int o = 0; o < k; ++o)
      for (std::size_t j = 0; j + 1 < d.size() - static_cast<std::size_t>(o); ++j)
        d[j] = d[j + 1] - d[j];
    const int len = np - k;
    // order-k differences of a degree-k polynomial are a nonzero constant
    if (k > 0 && std::abs(d[0]) <= 1e-9 * maxabs) return false;
    // one more difference must vanish
    bool vanish = true;
    for (int j = 0; j + 1 < len; ++j)
      if (std::abs(d[j + 1] - d[j]) > 1e-7 * maxabs) vanish = false;
    if (!vanish) return false;
  }
  return true;
}

}  // namespace specfilt
