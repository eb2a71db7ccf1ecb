#pragma once

// Closed-form asymptotic constants of the power-variation estimators.
//
// Bounded domain, time sections at x on [c, d] with n steps, eps = (d-c) theta / n:
//   sigma_n^2 = 2/sqrt(pi theta) sum_k sin^2(kx)/k^2 (1 - e^{-eps k^2})
//   G_j       = 1/sqrt(pi theta) sum_k sin^2(kx)/k^2 (e^{-j eps k^2} - e^{-(j+1) eps k^2}),  G_0 = sigma_n^2 / 2
//   F(j)      = G_j - G_{j-1} (j >= 1),  F(0) = sigma_n^2
//   sigma_bar_2^2 = 72 + 144 lim sum_{j<n} (1 - j/n) (F(j)/sigma_n^2)^2
//   sigma_bar_4^2 = 24 +  48 lim sum_{j<n} (1 - j/n) (F(j)/sigma_n^2)^4
// Whole line (fBM, H = 1/4):
//   r(j) = ((j+1)^{1/2} + |j-1|^{1/2} - 2 j^{1/2}) / 2
//   c_l^2 = 1 + 2 lim sum_{j<n} (1 - j/n) r(j)^l,   c^2 = 72 c_2^2 + 24 c_4^2
//
// Every k-series is summed to an explicit K with a rigorous bound on the
// discarded terms; the infinite tail of slowly decaying series is replaced by
// a midpoint integral, and the bound covers the difference.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace heatvar {

struct SeriesValue {
  double value = 0.0;
  double error_bound = 0.0;
  std::size_t terms = 0;
};

inline constexpr double kDefaultTailTol = 1e-12;

SeriesValue sigma_n_squared(double theta, double x, double length, std::size_t n, double tail_tol = kDefaultTailTol);

/// G_j for j >= 0.
SeriesValue g_constant(double theta, double x, double length, std::size_t n, std::size_t j,
                       double tail_tol = kDefaultTailTol);

/// F(j) for 0 <= j <= n.
SeriesValue covariance_F(double theta, double x, double length, std::size_t n, std::size_t j,
                         double tail_tol = kDefaultTailTol);

struct BoundedDomainConstants {
  double theta = 0.0;
  double x = 0.0;
  double length = 0.0;
  std::size_t n = 0;
  std::size_t series_terms = 0;   // K used for sigma_n^2
  double sigma_n2 = 0.0;
  double sigma_n2_error = 0.0;
  std::vector<double> F;          // j = 0..n-1
  double F_error = 0.0;           // max error bound over j
  double sigma_bar2_sq = 0.0;     // finite-n sums
  double sigma_bar4_sq = 0.0;
};

/// sigma_n^2, F(0..n-1) and the finite-n sigma_bar sums.
BoundedDomainConstants bounded_domain_constants(double theta, double x, double length, std::size_t n,
                                                double tail_tol = kDefaultTailTol);

/// Limit of a sequence indexed by n, extrapolated by a polynomial of degree
/// <= 2 in h = 1/sqrt(n) through the last three points.
struct LimitEstimate {
  double value = 0.0;
  double error_estimate = 0.0;  // spread of the last two extrapolated iterates
  bool converged = true;        // false if raw spreads fail to shrink monotonically
  std::vector<std::size_t> n_sequence;
  std::vector<double> iterates;
};

LimitEstimate extrapolate_limit(std::span<const std::size_t> n_sequence, std::span<const double> values);

struct SigmaBarConstants {
  LimitEstimate sigma_bar2_sq;
  LimitEstimate sigma_bar4_sq;
  bool converged() const { return sigma_bar2_sq.converged && sigma_bar4_sq.converged; }
};

SigmaBarConstants sigma_bar_constants(double theta, double x, double length, std::span<const std::size_t> n_sequence,
                                      double tail_tol = kDefaultTailTol);

double fbm_increment_correlation(std::size_t j);

struct WholeLineConstants {
  std::size_t max_lag = 0;
  LimitEstimate c_check2_sq;
  LimitEstimate c_check4_sq;
  double c_check_sq = 0.0;
  double c_check_sq_error = 0.0;
  bool converged() const { return c_check2_sq.converged && c_check4_sq.converged; }
};

/// Lags beyond max_lag are dropped from the finite-n sums.
WholeLineConstants c_check_constants(std::size_t max_lag, std::span<const std::size_t> n_sequence);
/// Defaults: max_lag = 2^22, n = 2^10, 2^12, ..., 2^22.
WholeLineConstants c_check_constants();

/// sqrt(n) sum_k sin^2(kx)/k^2 (1 - e^{-theta k^2 / n}).
SeriesValue keylimit_check(double theta, double x, std::size_t n, double tail_tol = kDefaultTailTol);

/// Integral bracket of L1 = sqrt(n) sum_k (1 - e^{-theta k^2/n}) / (2 k^2) and the
/// bound |value - L1| <= 2 theta / sqrt(n).
struct KeylimitBracket {
  double value = 0.0;
  double l1 = 0.0;
  double lower = 0.0;  // (sqrt(theta)/2) [(1 - e^{-s^2})/s + sqrt(pi) erfc(s)],  s = sqrt(theta/n)
  double upper = 0.0;  // sqrt(pi theta) / 2
  double l2_bound = 0.0;
  bool l1_inside() const { return lower <= l1 && l1 <= upper; }
  bool value_inside() const { return lower - l2_bound <= value && value <= upper + l2_bound; }
};

KeylimitBracket keylimit_bracket(double theta, double x, std::size_t n, double tail_tol = kDefaultTailTol);

enum class CltScheme {
  FixedTimeTheta,         // theta sqrt(2/m)
  FixedTimeSigma2,        // sigma^2 sqrt(2/m)
  WholeLineTheta,         // theta c / (3 sqrt(n))
  WholeLineSigma2,        // sigma^2 c / (6 sqrt(n))
  BoundedTheta,           // theta sqrt(sb2 + sb4) / (3 sqrt(n)), recentered
  BoundedSigma2,          // sigma^2 sqrt(sb2 + sb4) / (6 sqrt(n)), recentered
  BoundedThetaUnscaled,   // theta sqrt(sb2 + sb4) / sqrt(n)
};

struct CltInputs {
  double theta = 0.0;
  double sigma2 = 0.0;
  std::size_t sample_size = 0;
  std::optional<double> c_check_sq;
  std::optional<double> sigma_bar_sum;  // sigma_bar_2^2 + sigma_bar_4^2
};

/// Standard deviation of the estimator at the given sample size implied by
/// its CLT. Throws std::invalid_argument if a needed constant is missing.
double theoretical_std(CltScheme scheme, const CltInputs& in);

}  // namespace heatvar
