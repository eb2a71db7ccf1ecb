#include "heatvar/estimators.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <vector>

#include "heatvar/kernels.hpp"

namespace heatvar {

namespace {

constexpr double kPiValue = 3.14159265358979323846;

double positive_variation(const PathSample& s, double p) {
  const double v = power_variation(s, p);
  if (!(v > 0.0)) throw DegenerateInputError("input path has zero variation");
  return v;
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
}

void require_time_section(const PathSample& s) {
  if (!(s.grid().a() > 0.0)) throw std::invalid_argument("time sections need c > 0");
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::FixedSpaceTimeGrid:
      return "fixed-space";
    case Scheme::FixedTimeSpaceGrid:
      return "fixed-time";
    case Scheme::Joint:
      return "joint";
    case Scheme::SpaceTimeAveraged:
      return "averaged";
  }
  return "unknown";
}

EstimateReport theta_hat_fixed_space(const PathSample& time_section, double sigma, std::optional<double> c_check_sq) {
  require_positive(sigma, "sigma");
  require_time_section(time_section);
  const double v4 = positive_variation(time_section, 4.0);
  const double len = time_section.grid().length();
  const std::size_t n = time_section.grid().m();
  EstimateReport r;
  r.estimate = 3.0 * len * std::pow(sigma, 4) / (kPiValue * v4);
  r.n_or_m = n;
  r.scheme = Scheme::FixedSpaceTimeGrid;
  r.known_parameter = sigma;
  if (c_check_sq) r.theoretical_std = r.estimate * std::sqrt(*c_check_sq) / (3.0 * std::sqrt(static_cast<double>(n)));
  return r;
}

EstimateReport sigma2_hat_fixed_space(const PathSample& time_section, double theta, std::optional<double> c_check_sq) {
  require_positive(theta, "theta");
  require_time_section(time_section);
  const double v4 = positive_variation(time_section, 4.0);
  const double len = time_section.grid().length();
  const std::size_t n = time_section.grid().m();
  EstimateReport r;
  r.estimate = std::sqrt(theta * kPiValue * v4 / (3.0 * len));
  r.n_or_m = n;
  r.scheme = Scheme::FixedSpaceTimeGrid;
  r.known_parameter = theta;
  if (c_check_sq) r.theoretical_std = r.estimate * std::sqrt(*c_check_sq) / (6.0 * std::sqrt(static_cast<double>(n)));
  return r;
}

EstimateReport theta_tilde_fixed_time(const PathSample& space_section, double sigma) {
  require_positive(sigma, "sigma");
  const double v2 = positive_variation(space_section, 2.0);
  const std::size_t m = space_section.grid().m();
  EstimateReport r;
  r.estimate = space_section.grid().length() * sigma * sigma / (2.0 * v2);
  r.n_or_m = m;
  r.scheme = Scheme::FixedTimeSpaceGrid;
  r.known_parameter = sigma;
  r.theoretical_std = r.estimate * std::sqrt(2.0 / static_cast<double>(m));
  return r;
}

EstimateReport sigma2_tilde_fixed_time(const PathSample& space_section, double theta) {
  require_positive(theta, "theta");
  const double v2 = positive_variation(space_section, 2.0);
  const std::size_t m = space_section.grid().m();
  EstimateReport r;
  r.estimate = 2.0 * theta * v2 / space_section.grid().length();
  r.n_or_m = m;
  r.scheme = Scheme::FixedTimeSpaceGrid;
  r.known_parameter = theta;
  r.theoretical_std = r.estimate * std::sqrt(2.0 / static_cast<double>(m));
  return r;
}

JointEstimate joint_estimate(const PathSample& time_section, const PathSample& space_section) {
  require_time_section(time_section);
  const double v4 = positive_variation(time_section, 4.0);
  const double v2 = positive_variation(space_section, 2.0);
  const double dc = time_section.grid().length();
  const double ba = space_section.grid().length();
  JointEstimate j;
  j.theta.estimate = kPiValue * ba * ba * v4 / (12.0 * dc * v2 * v2);
  j.sigma2.estimate = kPiValue * ba * v4 / (6.0 * dc * v2);
  for (auto* r : {&j.theta, &j.sigma2}) {
    r->scheme = Scheme::Joint;
    r->n_or_m = time_section.grid().m();
  }
  return j;
}

EstimateReport averaged_estimates(std::span<const PathSample> sections, AveragedKind kind, double known_parameter,
                                  std::span<const double> weights) {
  if (sections.empty()) throw std::invalid_argument("averaged estimates need at least one section");
  if (!weights.empty() && weights.size() != sections.size()) {
    throw std::invalid_argument("one weight per section is required");
  }
  const auto& g0 = sections.front().grid();
  for (const auto& s : sections) {
    if (s.grid().m() != g0.m() || s.grid().length() != g0.length()) {
      throw std::invalid_argument("all sections must share the grid shape");
    }
  }
  std::vector<double> est(sections.size());
  parallel_for(sections.size(), [&](std::size_t i) {
    switch (kind) {
      case AveragedKind::ThetaFixedSpace:
        est[i] = theta_hat_fixed_space(sections[i], known_parameter).estimate;
        break;
      case AveragedKind::Sigma2FixedSpace:
        est[i] = sigma2_hat_fixed_space(sections[i], known_parameter).estimate;
        break;
      case AveragedKind::ThetaFixedTime:
        est[i] = theta_tilde_fixed_time(sections[i], known_parameter).estimate;
        break;
      case AveragedKind::Sigma2FixedTime:
        est[i] = sigma2_tilde_fixed_time(sections[i], known_parameter).estimate;
        break;
    }
  });
  CompensatedSum sum;
  if (weights.empty()) {
    for (double e : est) sum.add(e);
  } else {
    CompensatedSum wsum;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
      wsum.add(w);
    }
    if (!(wsum.value() > 0.0)) throw std::invalid_argument("weights must not all be zero");
    for (std::size_t i = 0; i < est.size(); ++i) sum.add(weights[i] / wsum.value() * est[i]);
  }
  EstimateReport r;
  r.estimate = weights.empty() ? sum.value() / static_cast<double>(est.size()) : sum.value();
  r.n_or_m = g0.m();
  r.scheme = Scheme::SpaceTimeAveraged;
  r.known_parameter = known_parameter;
  return r;
}

void write_report_csv_header(std::ostream& out) {
  out << "scheme,n_or_m,estimate,theoretical_std,known_parameter\n";
}

void write_report_csv_row(std::ostream& out, const EstimateReport& report) {
  const auto old = out.precision(17);
  out << to_string(report.scheme) << ',' << report.n_or_m << ',' << report.estimate << ',';
  if (report.theoretical_std) out << *report.theoretical_std;
  out << ',';
  if (report.known_parameter) out << *report.known_parameter;
  out << '\n';
  out.precision(old);
}

}  // namespace heatvar
