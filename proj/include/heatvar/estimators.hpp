#pragma once

// Power-variation estimators of theta and sigma^2.
//
// Time sections u(., x) on [c, d] (n steps) use the quartic variation V4,
// space sections u(t, .) on [a, b] (m steps) use the quadratic variation V2:
//   theta_hat   = 3 (d-c) sigma^4 / (pi V4)          sigma2_hat   = sqrt(theta pi V4 / (3 (d-c)))
//   theta_tilde = (b-a) sigma^2 / (2 V2)             sigma2_tilde = 2 theta V2 / (b-a)
//   joint:  theta_bar = pi (b-a)^2 V4 / (12 (d-c) V2^2),  sigma2_bar = pi (b-a) V4 / (6 (d-c) V2)

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

#include "heatvar/grid.hpp"

namespace heatvar {

enum class Scheme { FixedSpaceTimeGrid, FixedTimeSpaceGrid, Joint, SpaceTimeAveraged };

std::string to_string(Scheme s);

struct EstimateReport {
  double estimate = 0.0;
  std::size_t n_or_m = 0;
  Scheme scheme = Scheme::FixedSpaceTimeGrid;
  std::optional<double> theoretical_std;
  std::optional<double> known_parameter;
};

/// Raised when an input path has zero variation.
class DegenerateInputError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Time section on [c, d] with c > 0. If c_check_sq (the whole-line constant)
/// is given, theoretical_std = estimate * sqrt(c_check_sq) / (3 sqrt(n)).
EstimateReport theta_hat_fixed_space(const PathSample& time_section, double sigma,
                                     std::optional<double> c_check_sq = std::nullopt);
/// theoretical_std = estimate * sqrt(c_check_sq) / (6 sqrt(n)) when c_check_sq is given.
EstimateReport sigma2_hat_fixed_space(const PathSample& time_section, double theta,
                                      std::optional<double> c_check_sq = std::nullopt);

/// theoretical_std = estimate * sqrt(2/m) (plug-in).
EstimateReport theta_tilde_fixed_time(const PathSample& space_section, double sigma);
/// theoretical_std = estimate * sqrt(2/m) (plug-in).
EstimateReport sigma2_tilde_fixed_time(const PathSample& space_section, double theta);

struct JointEstimate {
  EstimateReport theta;
  EstimateReport sigma2;
};

JointEstimate joint_estimate(const PathSample& time_section, const PathSample& space_section);

enum class AveragedKind { ThetaFixedSpace, Sigma2FixedSpace, ThetaFixedTime, Sigma2FixedTime };

/// Mean of the per-section estimates in section order. Optional weights
/// (normalized internally) replace the plain mean. All sections must share
/// the number of steps and the interval length.
EstimateReport averaged_estimates(std::span<const PathSample> sections, AveragedKind kind, double known_parameter,
                                  std::span<const double> weights = {});

// CSV: scheme,n_or_m,estimate,theoretical_std,known_parameter (absent values are empty).
void write_report_csv_header(std::ostream& out);
void write_report_csv_row(std::ostream& out, const EstimateReport& report);

}  // namespace heatvar
