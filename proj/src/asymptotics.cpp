#include "heatvar/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "heatvar/grid.hpp"
#include "heatvar/kernels.hpp"

namespace heatvar {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::size_t kMaxTerms = 500'000'000;

void check_point(double theta, double x, double length, std::size_t n, double tol) {
  if (!(theta > 0.0)) throw std::invalid_argument("theta must be positive");
  if (!(x > 0.0 && x < kPi)) throw std::domain_error("x must lie strictly inside (0, pi)");
  if (!(length > 0.0)) throw std::invalid_argument("interval length must be positive");
  if (n == 0) throw std::invalid_argument("n must be >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("tail tolerance must be positive");
}

// (1 - e^{-eps k^2}) / k^2
inline double g_slow(double eps, double k) { return -std::expm1(-eps * k * k) / (k * k); }

// int_a^inf (1 - e^{-eps z^2}) / z^2 dz
double slow_tail_integral(double eps, double a) {
  return -std::expm1(-eps * a * a) / a + std::sqrt(kPi * eps) * std::erfc(std::sqrt(eps) * a);
}

// sum_k w(k) g_slow(eps, k) with w = sin^2(kx) (sin_weight) or w = 1/2.
// The tail k > K is replaced by the midpoint integral (1/2) int_{K+1/2}^inf g;
// the discarded error is at most g(K)/2 + g(K+1)/(2|sin x|) (monotone g plus
// Abel summation of cos(2kx)), or g(K)/2 without the oscillating part.
SeriesValue slow_series(double eps, double x, bool sin_weight, double tol) {
  const double inv_sin = sin_weight ? 1.0 / std::fabs(std::sin(x)) : 0.0;
  auto bound = [&](std::size_t K) {
    const double k = static_cast<double>(K);
    return 0.5 * g_slow(eps, k) + 0.5 * inv_sin * g_slow(eps, k + 1.0);
  };
  std::size_t hi = static_cast<std::size_t>(std::ceil(std::sqrt((1.0 + inv_sin) / (2.0 * tol)))) + 1;
  hi = std::min(hi, kMaxTerms);
  std::size_t lo = 1;
  if (bound(lo) <= tol) {
    hi = lo;
  } else {
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      (bound(mid) <= tol ? hi : lo) = mid;
    }
  }
  const std::size_t K = std::max<std::size_t>(hi, 16);
  const double head = parallel_sum(1, K + 1, [&](std::size_t k) {
    const double kk = static_cast<double>(k);
    const double w = sin_weight ? std::sin(kk * x) : std::sqrt(0.5);
    return w * w * g_slow(eps, kk);
  });
  const double tail = 0.5 * slow_tail_integral(eps, static_cast<double>(K) + 0.5);
  return {head + tail, bound(K), K};
}

// Bound on sum_{k>K} e^{-j eps k^2} (1 - e^{-eps k^2}) / k^2 <= eps int_K^inf e^{-j eps z^2} dz.
double fast_tail_bound(double eps, double j, std::size_t K) {
  const double a = std::sqrt(j * eps);
  return eps * std::sqrt(kPi) / (2.0 * a) * std::erfc(a * static_cast<double>(K));
}

std::size_t fast_terms(double eps, double j, double tol) {
  for (double L = 1.0; L < 800.0; L += 1.0) {
    const auto K = static_cast<std::size_t>(std::ceil(std::sqrt(L / (j * eps))));
    if (fast_tail_bound(eps, j, K) <= tol) return std::max<std::size_t>(K, 1);
  }
  return static_cast<std::size_t>(std::ceil(std::sqrt(800.0 / (j * eps))));
}

// sum_k sin^2(kx)/k^2 e^{-j eps k^2} (1 - e^{-eps k^2}), j >= 1.
SeriesValue fast_series(double eps, double x, std::size_t j, double tol) {
  const double jd = static_cast<double>(j);
  const std::size_t K = fast_terms(eps, jd, tol);
  CompensatedSum s;
  for (std::size_t k = 1; k <= K; ++k) {
    const double kk = static_cast<double>(k);
    const double sn = std::sin(kk * x);
    s.add(sn * sn * std::exp(-jd * eps * kk * kk) * g_slow(eps, kk));
  }
  return {s.value(), fast_tail_bound(eps, jd, K), K};
}

SeriesValue scaled(SeriesValue v, double f) {
  v.value *= f;
  v.error_bound *= std::fabs(f);
  return v;
}

// Value at h = 0 of the interpolating polynomial through (h_i, y_i).
double neville_at_zero(std::span<const double> h, std::span<const double> y) {
  std::vector<double> p(y.begin(), y.end());
  const std::size_t n = p.size();
  for (std::size_t level = 1; level < n; ++level) {
    for (std::size_t i = 0; i + level < n; ++i) {
      p[i] = (h[i + level] * p[i] - h[i] * p[i + 1]) / (h[i + level] - h[i]);
    }
  }
  return p[0];
}

}  // namespace

SeriesValue sigma_n_squared(double theta, double x, double length, std::size_t n, double tail_tol) {
  check_point(theta, x, length, n, tail_tol);
  const double pref = 2.0 / std::sqrt(kPi * theta);
  const double eps = length * theta / static_cast<double>(n);
  return scaled(slow_series(eps, x, true, tail_tol / pref), pref);
}

SeriesValue g_constant(double theta, double x, double length, std::size_t n, std::size_t j, double tail_tol) {
  check_point(theta, x, length, n, tail_tol);
  if (j == 0) return scaled(sigma_n_squared(theta, x, length, n, 2.0 * tail_tol), 0.5);
  const double pref = 1.0 / std::sqrt(kPi * theta);
  const double eps = length * theta / static_cast<double>(n);
  return scaled(fast_series(eps, x, j, tail_tol / pref), pref);
}

SeriesValue covariance_F(double theta, double x, double length, std::size_t n, std::size_t j, double tail_tol) {
  check_point(theta, x, length, n, tail_tol);
  if (j > n) throw std::invalid_argument("lag must satisfy j <= n");
  if (j == 0) return sigma_n_squared(theta, x, length, n, tail_tol);
  const SeriesValue a = g_constant(theta, x, length, n, j, tail_tol / 2.0);
  const SeriesValue b = g_constant(theta, x, length, n, j - 1, tail_tol / 2.0);
  return {a.value - b.value, a.error_bound + b.error_bound, std::max(a.terms, b.terms)};
}

BoundedDomainConstants bounded_domain_constants(double theta, double x, double length, std::size_t n,
                                                double tail_tol) {
  check_point(theta, x, length, n, tail_tol);
  BoundedDomainConstants c;
  c.theta = theta;
  c.x = x;
  c.length = length;
  c.n = n;
  const SeriesValue s = sigma_n_squared(theta, x, length, n, tail_tol);
  c.sigma_n2 = s.value;
  c.sigma_n2_error = s.error_bound;
  c.series_terms = s.terms;

  // G_0..G_{n-1}
  std::vector<SeriesValue> G(n);
  G[0] = {s.value / 2.0, s.error_bound / 2.0, s.terms};
  parallel_for(n > 1 ? n - 1 : 0, [&](std::size_t i) { G[i + 1] = g_constant(theta, x, length, n, i + 1, tail_tol); });
  c.F.assign(n, 0.0);
  c.F[0] = s.value;
  for (std::size_t j = 1; j < n; ++j) {
    c.F[j] = G[j].value - G[j - 1].value;
    c.F_error = std::max(c.F_error, G[j].error_bound + G[j - 1].error_bound);
  }
  CompensatedSum s2, s4;
  for (std::size_t j = 1; j < n; ++j) {
    const double w = 1.0 - static_cast<double>(j) / static_cast<double>(n);
    const double rho = c.F[j] / c.sigma_n2;
    const double r2 = rho * rho;
    s2.add(w * r2);
    s4.add(w * r2 * r2);
  }
  c.sigma_bar2_sq = 72.0 + 144.0 * s2.value();
  c.sigma_bar4_sq = 24.0 + 48.0 * s4.value();
  return c;
}

LimitEstimate extrapolate_limit(std::span<const std::size_t> n_sequence, std::span<const double> values) {
  if (n_sequence.empty() || n_sequence.size() != values.size()) {
    throw std::invalid_argument("extrapolation needs matching, nonempty sequences");
  }
  for (std::size_t i = 1; i < n_sequence.size(); ++i) {
    if (n_sequence[i] <= n_sequence[i - 1]) throw std::invalid_argument("n sequence must be increasing");
  }
  LimitEstimate e;
  e.n_sequence.assign(n_sequence.begin(), n_sequence.end());
  e.iterates.assign(values.begin(), values.end());
  const std::size_t N = values.size();
  if (N == 1) {
    e.value = values[0];
    e.error_estimate = std::numeric_limits<double>::infinity();
    e.converged = false;
    return e;
  }
  std::vector<double> h(N);
  for (std::size_t i = 0; i < N; ++i) h[i] = 1.0 / std::sqrt(static_cast<double>(n_sequence[i]));
  std::vector<double> extrap;
  for (std::size_t i = 1; i < N; ++i) {
    const std::size_t first = i >= 2 ? i - 2 : 0;
    const std::size_t count = i - first + 1;
    extrap.push_back(neville_at_zero(std::span<const double>(h).subspan(first, count), values.subspan(first, count)));
  }
  e.value = extrap.back();
  e.error_estimate = extrap.size() >= 2 ? std::fabs(extrap.back() - extrap[extrap.size() - 2])
                                        : std::fabs(values[1] - values[0]);
  for (std::size_t i = 2; i < N; ++i) {
    if (!(std::fabs(values[i] - values[i - 1]) < std::fabs(values[i - 1] - values[i - 2]))) e.converged = false;
  }
  return e;
}

SigmaBarConstants sigma_bar_constants(double theta, double x, double length, std::span<const std::size_t> n_sequence,
                                      double tail_tol) {
  std::vector<double> v2, v4;
  for (std::size_t n : n_sequence) {
    const auto c = bounded_domain_constants(theta, x, length, n, tail_tol);
    v2.push_back(c.sigma_bar2_sq);
    v4.push_back(c.sigma_bar4_sq);
  }
  return {extrapolate_limit(n_sequence, v2), extrapolate_limit(n_sequence, v4)};
}

double fbm_increment_correlation(std::size_t j) {
  if (j == 0) return 1.0;
  // (sqrt(j+1) + sqrt(j-1) - 2 sqrt(j)) / 2 without cancellation.
  const double jd = static_cast<double>(j);
  const double p = std::sqrt(jd + 1.0);
  const double q = std::sqrt(jd);
  const double s = std::sqrt(jd - 1.0);
  return -1.0 / ((p + q) * (q + s) * (p + s));
}

WholeLineConstants c_check_constants(std::size_t max_lag, std::span<const std::size_t> n_sequence) {
  if (max_lag < 1) throw std::invalid_argument("max_lag must be >= 1");
  std::vector<double> v2, v4;
  for (std::size_t n : n_sequence) {
    if (n < 2) throw std::invalid_argument("n must be >= 2");
    const double nd = static_cast<double>(n);
    const std::size_t last = std::min(n - 1, max_lag);
    const double s2 = parallel_sum(1, last + 1, [&](std::size_t j) {
      const double r = fbm_increment_correlation(j);
      return (1.0 - static_cast<double>(j) / nd) * r * r;
    });
    const double s4 = parallel_sum(1, last + 1, [&](std::size_t j) {
      const double r = fbm_increment_correlation(j);
      return (1.0 - static_cast<double>(j) / nd) * r * r * r * r;
    });
    v2.push_back(1.0 + 2.0 * s2);
    v4.push_back(1.0 + 2.0 * s4);
  }
  WholeLineConstants w;
  w.max_lag = max_lag;
  w.c_check2_sq = extrapolate_limit(n_sequence, v2);
  w.c_check4_sq = extrapolate_limit(n_sequence, v4);
  w.c_check_sq = 72.0 * w.c_check2_sq.value + 24.0 * w.c_check4_sq.value;
  w.c_check_sq_error = 72.0 * w.c_check2_sq.error_estimate + 24.0 * w.c_check4_sq.error_estimate;
  return w;
}

WholeLineConstants c_check_constants() {
  std::vector<std::size_t> ns;
  for (std::size_t n = 1 << 10; n <= (1u << 22); n <<= 2) ns.push_back(n);
  return c_check_constants(1u << 22, ns);
}

SeriesValue keylimit_check(double theta, double x, std::size_t n, double tail_tol) {
  check_point(theta, x, 1.0, n, tail_tol);
  const double pref = std::sqrt(static_cast<double>(n));
  return scaled(slow_series(theta / static_cast<double>(n), x, true, tail_tol / pref), pref);
}

KeylimitBracket keylimit_bracket(double theta, double x, std::size_t n, double tail_tol) {
  KeylimitBracket b;
  b.value = keylimit_check(theta, x, n, tail_tol).value;
  const double sq = std::sqrt(static_cast<double>(n));
  b.l1 = sq * slow_series(theta / static_cast<double>(n), x, false, tail_tol / sq).value;
  const double s = std::sqrt(theta / static_cast<double>(n));
  b.lower = std::sqrt(theta) / 2.0 * (-std::expm1(-s * s) / s + std::sqrt(kPi) * std::erfc(s));
  b.upper = std::sqrt(kPi * theta) / 2.0;
  b.l2_bound = 2.0 * theta / sq;
  return b;
}

double theoretical_std(CltScheme scheme, const CltInputs& in) {
  if (in.sample_size == 0) throw std::invalid_argument("sample size must be >= 1");
  const double rn = std::sqrt(static_cast<double>(in.sample_size));
  auto need = [](const std::optional<double>& v, const char* what) {
    if (!v) throw std::invalid_argument(std::string("scheme needs ") + what);
    if (!(*v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
    return *v;
  };
  switch (scheme) {
    case CltScheme::FixedTimeTheta:
      return in.theta * std::sqrt(2.0) / rn;
    case CltScheme::FixedTimeSigma2:
      return in.sigma2 * std::sqrt(2.0) / rn;
    case CltScheme::WholeLineTheta:
      return in.theta * std::sqrt(need(in.c_check_sq, "c_check_sq")) / (3.0 * rn);
    case CltScheme::WholeLineSigma2:
      return in.sigma2 * std::sqrt(need(in.c_check_sq, "c_check_sq")) / (6.0 * rn);
    case CltScheme::BoundedTheta:
      return in.theta * std::sqrt(need(in.sigma_bar_sum, "sigma_bar_sum")) / (3.0 * rn);
    case CltScheme::BoundedSigma2:
      return in.sigma2 * std::sqrt(need(in.sigma_bar_sum, "sigma_bar_sum")) / (6.0 * rn);
    case CltScheme::BoundedThetaUnscaled:
      return in.theta * std::sqrt(need(in.sigma_bar_sum, "sigma_bar_sum")) / rn;
  }
  throw std::invalid_argument("unknown scheme");
}

}  // namespace heatvar
