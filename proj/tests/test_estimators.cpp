#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "heatvar/estimators.hpp"
#include "heatvar/gaussian_refs.hpp"
#include "heatvar/kernels.hpp"
#include "heatvar/rng.hpp"
#include "heatvar/spectral.hpp"

namespace heatvar {
namespace {

// Path with prescribed increments d_j.
PathSample from_increments(double a, double b, const std::vector<double>& d) {
  std::vector<double> v{0.0};
  for (double x : d) v.push_back(v.back() + x);
  return PathSample(uniform_grid(a, b, d.size()), v);
}

TEST(Estimators, ClosedFormsOnSyntheticPaths) {
  // Increments +/-0.1 on [0.25, 1]: V2 = 4 * 0.01, V4 = 4 * 1e-4.
  const auto ts = from_increments(0.25, 1.0, {0.1, -0.1, 0.1, 0.1});
  const double V4 = 4e-4, V2 = 4e-2, dc = 0.75, sigma = 0.2, theta = 0.1;
  EXPECT_NEAR(theta_hat_fixed_space(ts, sigma).estimate, 3 * dc * std::pow(sigma, 4) / (kPi * V4), 1e-14);
  EXPECT_NEAR(sigma2_hat_fixed_space(ts, theta).estimate, std::sqrt(theta * kPi * V4 / (3 * dc)), 1e-15);
  const auto ss = from_increments(0.0, 2.0, {0.1, -0.1, 0.1, 0.1});
  EXPECT_NEAR(theta_tilde_fixed_time(ss, sigma).estimate, 2.0 * sigma * sigma / (2 * V2), 1e-14);
  EXPECT_NEAR(sigma2_tilde_fixed_time(ss, theta).estimate, 2 * theta * V2 / 2.0, 1e-15);
  const auto j = joint_estimate(ts, ss);
  EXPECT_NEAR(j.theta.estimate, kPi * 4.0 * V4 / (12 * dc * V2 * V2), 1e-14);
  EXPECT_NEAR(j.sigma2.estimate, kPi * 2.0 * V4 / (6 * dc * V2), 1e-15);
}

TEST(Estimators, ReportFields) {
  const auto ss = from_increments(0.0, 1.0, {0.1, -0.2, 0.3, 0.1, 0.0});
  const auto r = theta_tilde_fixed_time(ss, 0.2);
  EXPECT_EQ(r.n_or_m, 5u);
  EXPECT_EQ(r.scheme, Scheme::FixedTimeSpaceGrid);
  ASSERT_TRUE(r.known_parameter);
  EXPECT_EQ(*r.known_parameter, 0.2);
  ASSERT_TRUE(r.theoretical_std);
  EXPECT_NEAR(*r.theoretical_std, r.estimate * std::sqrt(2.0 / 5), 1e-15);

  const auto ts = from_increments(0.5, 1.0, {0.1, -0.2, 0.3});
  EXPECT_FALSE(theta_hat_fixed_space(ts, 0.2).theoretical_std);
  const auto with_c = theta_hat_fixed_space(ts, 0.2, 109.0);
  ASSERT_TRUE(with_c.theoretical_std);
  EXPECT_NEAR(*with_c.theoretical_std, with_c.estimate * std::sqrt(109.0) / (3 * std::sqrt(3.0)), 1e-15);
}

TEST(Estimators, DegenerateAndInvalidInputs) {
  const PathSample flat(uniform_grid(0.5, 1.0, 3), {1.0, 1.0, 1.0, 1.0});
  EXPECT_THROW(theta_hat_fixed_space(flat, 0.2), DegenerateInputError);
  EXPECT_THROW(theta_tilde_fixed_time(flat, 0.2), DegenerateInputError);
  const auto p = from_increments(0.5, 1.0, {0.1, 0.2});
  EXPECT_THROW(theta_tilde_fixed_time(p, 0.0), std::invalid_argument);
  EXPECT_THROW(sigma2_tilde_fixed_time(p, -1.0), std::invalid_argument);
  const auto from_zero = from_increments(0.0, 1.0, {0.1, 0.2});
  EXPECT_THROW(theta_hat_fixed_space(from_zero, 0.2), std::invalid_argument);
}

TEST(Estimators, JointIdentityHoldsPerPath) {
  const HeatModel m = make_model(0.1, 0.2, Domain::WholeLine);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto ts = wholeline_solution_time_section(m, {}, uniform_grid(0.25, 1.0, 512), s);
    const auto ss = wholeline_solution_space_section(m, {}, uniform_grid(0.0, kPi, 300), s);
    const auto j = joint_estimate(ts, ss);
    const double v2 = power_variation(ss, 2.0);
    EXPECT_NEAR(j.sigma2.estimate, 2.0 * j.theta.estimate * v2 / kPi, 1e-15 * j.sigma2.estimate);
  }
}

TEST(Estimators, AveragedIsMeanOfSectionEstimates) {
  std::vector<PathSample> sections;
  double sum = 0.0, wsum = 0.0;
  const std::vector<double> w{1.0, 2.0, 3.0};
  for (int i = 0; i < 3; ++i) {
    sections.push_back(from_increments(0.0, 1.0, {0.1 * (i + 1), -0.05, 0.2}));
    const double e = theta_tilde_fixed_time(sections.back(), 0.2).estimate;
    sum += e;
    wsum += w[i] * e;
  }
  const auto r = averaged_estimates(sections, AveragedKind::ThetaFixedTime, 0.2);
  EXPECT_NEAR(r.estimate, sum / 3, 1e-15);
  EXPECT_EQ(r.scheme, Scheme::SpaceTimeAveraged);
  EXPECT_NEAR(averaged_estimates(sections, AveragedKind::ThetaFixedTime, 0.2, w).estimate, wsum / 6, 1e-15);
  sections.push_back(from_increments(0.0, 1.0, {0.1, 0.2}));
  EXPECT_THROW(averaged_estimates(sections, AveragedKind::ThetaFixedTime, 0.2), std::invalid_argument);
  EXPECT_THROW(averaged_estimates({}, AveragedKind::ThetaFixedTime, 0.2), std::invalid_argument);
}

TEST(Estimators, ReportCsv) {
  std::ostringstream out;
  write_report_csv_header(out);
  EstimateReport r;
  r.estimate = 0.5;
  r.n_or_m = 10;
  r.scheme = Scheme::Joint;
  write_report_csv_row(out, r);
  EXPECT_EQ(out.str(), "scheme,n_or_m,estimate,theoretical_std,known_parameter\njoint,10,0.5,,\n");
}

TEST(Estimators, WholeLineFixedSpaceRecoversTheta) {
  // n = 2^12 on [0.25, 1], 200 replications: mean within 3% of 0.1.
  const HeatModel m = make_model(0.1, 0.2, Domain::WholeLine);
  const FbmGenerator gen(0.25, uniform_grid(0.25, 1.0, 4096));
  std::vector<double> th(200), s2(200);
  parallel_for(th.size(), [&](std::size_t r) {
    const auto p = wholeline_solution_time_section(m, {}, gen, substream(14, r));
    th[r] = theta_hat_fixed_space(p, 0.2).estimate;
    s2[r] = sigma2_hat_fixed_space(p, 0.1).estimate;
  });
  double mt = 0, ms = 0;
  for (std::size_t r = 0; r < th.size(); ++r) {
    mt += th[r];
    ms += s2[r];
  }
  EXPECT_NEAR(mt / th.size(), 0.1, 0.003);
  EXPECT_NEAR(ms / s2.size(), 0.04, 0.0012);
}

TEST(Estimators, BoundedFixedSpaceMedianNearTheta) {
  // n = 2^14 at x = pi/2: median of theta_hat within 5% of 0.1.
  const HeatModel m = make_model(0.1, 0.2);
  const TimeSectionSampler sampler(m, kPi / 2, uniform_grid(0.25, 1.0, 16384));
  std::vector<double> th(25);
  parallel_for(th.size(), [&](std::size_t r) {
    th[r] = theta_hat_fixed_space(sampler.sample(substream(15, r)), 0.2).estimate;
  });
  std::sort(th.begin(), th.end());
  EXPECT_NEAR(th[12], 0.1, 0.005);
}

TEST(Estimators, SmoothPerturbationDriftShrinks) {
  const HeatModel m = make_model(0.1, 0.2, Domain::WholeLine);
  const SmoothPerturbation y{PerturbationKind::TrigSeries, {0.3, 0.1}};
  double prev = 1e9;
  for (std::size_t mm : {100, 1000, 10000}) {
    double drift = 0.0;
    for (std::uint64_t s = 0; s < 30; ++s) {
      const auto g = uniform_grid(0.0, 2.0, mm);
      drift += std::fabs(theta_tilde_fixed_time(wholeline_solution_space_section(m, y, g, s), 0.2).estimate -
                         theta_tilde_fixed_time(wholeline_solution_space_section(m, {}, g, s), 0.2).estimate);
    }
    EXPECT_LT(drift, prev);
    prev = drift;
  }
}

}  // namespace
}  // namespace heatvar
