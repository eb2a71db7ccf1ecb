#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "heatvar/estimators.hpp"
#include "heatvar/kernels.hpp"
#include "heatvar/rng.hpp"
#include "heatvar/spectral.hpp"

namespace heatvar {
namespace {

// Direct k-series for Cov(u(t,x), u(t,y)), summed far enough that the
// neglected part (< sigma^2 / (pi theta K)) is below 1e-7 here.
double direct_covariance(const HeatModel& m, double t, double x, double y, std::size_t K = 2000000) {
  CompensatedSum s;
  for (std::size_t k = K; k >= 1; --k) s.add(eigenfunction(k, x) * eigenfunction(k, y) * mode_variance(m, k, t));
  return s.value();
}

double direct_increment_variance(const HeatModel& m, double t, double x, double y) {
  return direct_covariance(m, t, x, x) + direct_covariance(m, t, y, y) - 2.0 * direct_covariance(m, t, x, y);
}

TEST(Spectral, EigenfunctionAndModeVariance) {
  EXPECT_NEAR(eigenfunction(3, 0.5), std::sqrt(2.0 / kPi) * std::sin(1.5), 1e-15);
  EXPECT_THROW(eigenfunction(1, -0.1), std::domain_error);
  EXPECT_THROW(eigenfunction(0, 1.0), std::domain_error);
  const HeatModel m = make_model(0.1, 0.2);
  EXPECT_NEAR(mode_variance(m, 1, 1.0), (1 - std::exp(-0.2)) * 0.04 / 0.2, 1e-15);
  EXPECT_NEAR(mode_variance(m, 2, 1.0), (1 - std::exp(-0.8)) * 0.04 / 0.8, 1e-15);
  EXPECT_EQ(mode_variance(m, 5, 0.0), 0.0);
}

TEST(Spectral, ModelValidation) {
  EXPECT_THROW(make_model(0.0, 0.2), std::invalid_argument);
  EXPECT_THROW(make_model(0.1, -1.0), std::invalid_argument);
  EXPECT_THROW(make_model(0.1, 0.2, Domain::BoundedZeroPi, 0), std::invalid_argument);
}

TEST(Spectral, TailBoundAndWhiteRemainderModes) {
  const HeatModel m = make_model(0.1, 0.2);
  EXPECT_NEAR(pointwise_tail_bound(m, 15000), 0.04 / (kPi * 0.1 * 15000), 1e-18);
  const std::size_t K = white_remainder_modes(0.1, 1e-3);
  EXPECT_LE(std::exp(-0.1 * (K + 1.0) * (K + 1.0) * 1e-3), std::exp(-28.0) * (1 + 1e-12));
  EXPECT_GT(std::exp(-0.1 * double(K) * double(K) * 1e-3), std::exp(-28.0));
}

TEST(Spectral, FirstModeMarginalVariance) {
  // theta = 0.1, sigma = 0.2, 1000 steps on [0, 1]: Var u_1(1) = (1 - e^{-0.2}) 0.04 / 0.2.
  const HeatModel m = make_model(0.1, 0.2, Domain::BoundedZeroPi, 3);
  const auto grid = uniform_grid(0.0, 1.0, 1000);
  const int R = 10000;
  std::vector<double> u(R);
  parallel_for(R, [&](std::size_t r) { u[r] = simulate_modes(m, grid, substream(11, r)).coeff(1, 1000); });
  double s2 = 0.0;
  for (double v : u) s2 += v * v;
  const double expected = (1 - std::exp(-0.2)) * 0.04 / 0.2;
  EXPECT_NEAR(expected, 0.036254, 1e-6);
  EXPECT_NEAR(s2 / R, expected, 4.0 * expected * std::sqrt(2.0 / R));
}

TEST(Spectral, ModeStreamsDoNotDependOnModeCount) {
  const auto grid = uniform_grid(0.0, 0.5, 20);
  const auto small = simulate_modes(make_model(0.1, 0.2, Domain::BoundedZeroPi, 5), grid, 3);
  const auto large = simulate_modes(make_model(0.1, 0.2, Domain::BoundedZeroPi, 12), grid, 3);
  for (std::size_t k = 1; k <= 5; ++k) {
    for (std::size_t i = 0; i <= 20; ++i) EXPECT_EQ(small.coeff(k, i), large.coeff(k, i));
  }
  const auto a = draw_mode_marginals(make_model(0.1, 0.2, Domain::BoundedZeroPi, 10), 1.0, 8);
  const auto b = draw_mode_marginals(make_model(0.1, 0.2, Domain::BoundedZeroPi, 20), 1.0, 8);
  for (std::size_t k = 0; k < 10; ++k) EXPECT_EQ(a[k], b[k]);
}

TEST(Spectral, SimulationNeedsGridFromZero) {
  EXPECT_THROW(simulate_modes(make_model(0.1, 0.2), uniform_grid(0.5, 1.0, 4), 1), std::invalid_argument);
  EXPECT_THROW(simulate_modes(make_model(0.1, 0.2, Domain::WholeLine), uniform_grid(0.0, 1.0, 4), 1),
               std::invalid_argument);
}

TEST(Spectral, StateCsvRoundTrip) {
  const auto state = simulate_modes(make_model(0.3, 0.5, Domain::BoundedZeroPi, 4), uniform_grid(0.0, 2.0, 6), 17);
  std::stringstream buf;
  write_state_csv(buf, state);
  const auto back = read_state_csv(buf);
  EXPECT_EQ(back.model.theta, 0.3);
  EXPECT_EQ(back.model.sigma, 0.5);
  EXPECT_EQ(back.modes(), 4u);
  EXPECT_EQ(back.steps(), 6u);
  EXPECT_EQ(back.seed, 17u);
  EXPECT_EQ(back.coeffs, state.coeffs);
}

TEST(Spectral, EvaluateAtXSumsModes) {
  const auto state = simulate_modes(make_model(0.1, 0.2, Domain::BoundedZeroPi, 7), uniform_grid(0.0, 1.0, 5), 2);
  const auto path = evaluate_at_x(state, 1.1);
  for (std::size_t i = 0; i <= 5; ++i) {
    double s = 0.0;
    for (std::size_t k = 1; k <= 7; ++k) s += state.coeff(k, i) * eigenfunction(k, 1.1);
    EXPECT_NEAR(path[i], s, 1e-15);
  }
}

TEST(Spectral, TimeSectionRemainderVarianceMatchesDirectSeries) {
  const HeatModel m = make_model(0.1, 0.2);
  for (double x : {kPi / 2, 1.0}) {
    for (double t : {0.05, 1.0}) {
      for (std::size_t K : {0, 10, 300}) {
        CompensatedSum s;
        const std::size_t N = 2000000;
        for (std::size_t k = N; k > K; --k) s.add(eigenfunction(k, x) * eigenfunction(k, x) * mode_variance(m, k, t));
        // Terms beyond N are stationary with sin^2 averaging 1/2.
        s.add(m.sigma * m.sigma / (2 * kPi * m.theta * (N + 0.5)));
        EXPECT_NEAR(time_section_remainder_variance(m, x, K, t), s.value(), 1e-11) << x << ' ' << t << ' ' << K;
      }
    }
  }
}

// Empirical covariance of the exact sampler against the direct series, on a
// [0, pi] grid (aliased remainder) and on a sub-interval (factorized remainder).
void check_space_law(double a, double b, std::size_t K) {
  const HeatModel m = make_model(0.1, 0.2, Domain::BoundedZeroPi, K);
  const double t = 0.5;
  const auto grid = uniform_grid(a, b, 6);
  const SpaceSectionPlan plan(m, t, grid, TailMode::Exact);
  const std::size_t R = 20000;
  std::vector<PathSample> paths;
  paths.reserve(R);
  for (std::size_t r = 0; r < R; ++r) {
    const std::uint64_t seed = substream(21, r);
    paths.push_back(plan.evaluate(draw_mode_marginals(m, t, seed), seed));
  }
  for (std::size_t j = 1; j < 6; ++j) {
    const double x = grid.point(j), y = grid.point(j + 1);
    double vx = 0.0, dxy = 0.0;
    for (const auto& p : paths) {
      vx += p[j] * p[j];
      dxy += (p[j + 1] - p[j]) * (p[j + 1] - p[j]);
    }
    const double ex = direct_covariance(m, t, x, x), ed = direct_increment_variance(m, t, x, y);
    EXPECT_NEAR(vx / R, ex, 4.0 * ex * std::sqrt(2.0 / R)) << "Var u(t," << x << ")";
    EXPECT_NEAR(dxy / R, ed, 4.0 * ed * std::sqrt(2.0 / R)) << "increment at " << x;
  }
}

TEST(Spectral, AliasedSpaceSectionHasExactLaw) { check_space_law(0.0, kPi, 4); }
TEST(Spectral, GeneralSpaceSectionHasExactLaw) { check_space_law(0.5, 2.0, 4); }

TEST(Spectral, PlanStationarity) {
  EXPECT_TRUE(SpaceSectionPlan(make_model(0.1, 0.2, Domain::BoundedZeroPi, 2000), 1.0, uniform_grid(0, kPi, 100),
                               TailMode::Exact)
                  .stationary_tail());
  EXPECT_FALSE(SpaceSectionPlan(make_model(0.1, 0.2, Domain::BoundedZeroPi, 5), 0.01, uniform_grid(0, kPi, 100),
                                TailMode::Exact)
                   .stationary_tail());
}

TEST(Spectral, SpaceSectionErrors) {
  const HeatModel m = make_model(0.1, 0.2, Domain::BoundedZeroPi, 10);
  EXPECT_THROW(SpaceSectionPlan(m, 0.0, uniform_grid(0, kPi, 10), TailMode::Exact), std::invalid_argument);
  EXPECT_THROW(SpaceSectionPlan(m, 1.0, uniform_grid(0, 4.0, 10), TailMode::Exact), std::domain_error);
  const SpaceSectionPlan plan(m, 1.0, uniform_grid(0, kPi, 10), TailMode::Exact);
  EXPECT_THROW(plan.evaluate(std::vector<double>(3), 1), std::invalid_argument);
}

TEST(Spectral, TruncationBiasIsRemovedByRemainder) {
  // K = 2000, m = 1000: the plain sum misses about 2m/(pi^2 K) of V2.
  const std::size_t R = 40;
  const auto grid = uniform_grid(0.0, kPi, 1000);
  const HeatModel m = make_model(0.1, 0.2, Domain::BoundedZeroPi, 2000);
  double exact = 0.0, trunc = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    exact += theta_tilde_fixed_time(sample_fixed_time(m, 1.0, grid, substream(5, r), TailMode::Exact), 0.2).estimate;
    trunc += theta_tilde_fixed_time(sample_fixed_time(m, 1.0, grid, substream(5, r), TailMode::Truncate), 0.2).estimate;
  }
  EXPECT_NEAR(exact / R, 0.1, 0.003);
  EXPECT_GT(trunc / R, 0.107);
}

TEST(Spectral, ModeFieldTransitionsKeepMarginals) {
  const HeatModel m = make_model(0.1, 0.2, Domain::BoundedZeroPi, 3);
  const std::size_t R = 20000;
  double s1 = 0.0, s3 = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    ModeField f(m, substream(9, r));
    f.draw_marginal(0.4);
    f.advance(0.6);
    EXPECT_DOUBLE_EQ(f.time(), 1.0);
    s1 += f.coefficients()[0] * f.coefficients()[0];
    s3 += f.coefficients()[2] * f.coefficients()[2];
  }
  const double v1 = mode_variance(m, 1, 1.0), v3 = mode_variance(m, 3, 1.0);
  EXPECT_NEAR(s1 / R, v1, 4.0 * v1 * std::sqrt(2.0 / R));
  EXPECT_NEAR(s3 / R, v3, 4.0 * v3 * std::sqrt(2.0 / R));
}

TEST(Spectral, ModeFieldRejectsStalePlan) {
  const HeatModel m = make_model(0.1, 0.2, Domain::BoundedZeroPi, 50);
  const SpaceSectionPlan plan(m, 1.0, uniform_grid(0, kPi, 20), TailMode::Exact);
  ModeField f(m, 1);
  f.draw_marginal(0.5);
  EXPECT_THROW(f.space_section(plan), std::invalid_argument);
  f.advance(0.5);
  EXPECT_NO_THROW(f.space_section(plan));
}

TEST(Spectral, TimeSectionIncrementsHaveExactVariance) {
  const HeatModel m = make_model(0.1, 0.2);
  const double x = 1.0, c = 0.25, d = 1.0;
  const std::size_t n = 64, R = 3000;
  const TimeSectionSampler sampler(m, x, uniform_grid(c, d, n));
  EXPECT_EQ(sampler.effective_modes(), white_remainder_modes(0.1, (d - c) / n));

  // E V2 = sum_i sum_k h_k(x)^2 Var(u_k(t_i) - u_k(t_{i-1})).
  const double dt = (d - c) / n;
  double expected = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double t = c + (i - 1) * dt;
    CompensatedSum s;
    for (std::size_t k = 1000000; k >= 1; --k) {
      const double lam = 0.1 * double(k) * double(k);
      const double a = std::exp(-lam * dt);
      const double v = mode_variance(m, k, t) * (1 - a) * (1 - a) + 0.04 * (1 - a * a) / (2 * lam);
      s.add(eigenfunction(k, x) * eigenfunction(k, x) * v);
    }
    expected += s.value();
  }
  std::vector<double> v2(R);
  parallel_for(R, [&](std::size_t r) { v2[r] = power_variation(sampler.sample(substream(4, r)), 2.0); });
  double mean = 0.0, sq = 0.0;
  for (double v : v2) mean += v;
  mean /= R;
  for (double v : v2) sq += (v - mean) * (v - mean);
  const double se = std::sqrt(sq / (R - 1) / R);
  EXPECT_NEAR(mean, expected, 4.0 * se);
}

TEST(Spectral, SamplersIndependentOfThreadCount) {
  const int saved = max_threads();
  const HeatModel m = make_model(0.1, 0.2, Domain::BoundedZeroPi, 3000);
  const TimeSectionSampler ts(m, kPi / 2, uniform_grid(0.25, 1.0, 512));
  set_threads(1);
  const auto a = ts.sample(77);
  const auto s1 = sample_fixed_time(m, 1.0, uniform_grid(0.3, 2.5, 200), 77);
  set_threads(8);
  const auto b = ts.sample(77);
  const auto s8 = sample_fixed_time(m, 1.0, uniform_grid(0.3, 2.5, 200), 77);
  set_threads(saved);
  EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
  EXPECT_TRUE(std::equal(s1.values().begin(), s1.values().end(), s8.values().begin()));
  const auto ref = ts.sample_reference(77);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], ref[i], 1e-13);
}

}  // namespace
}  // namespace heatvar
