#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "heatvar/gaussian_refs.hpp"
#include "heatvar/kernels.hpp"
#include "heatvar/rng.hpp"

namespace heatvar {
namespace {

double mean_of(const std::vector<double>& v) {
  CompensatedSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

TEST(Fbm, CovarianceAndIncrementCorrelation) {
  EXPECT_DOUBLE_EQ(fbm_covariance(0.25, 1.0, 1.0), 1.0);
  EXPECT_NEAR(fbm_covariance(0.5, 0.3, 0.7), 0.3, 1e-15);  // Brownian motion: min(s, t)
  EXPECT_NEAR(fgn_autocorrelation(0.25, 1), 0.5 * (std::sqrt(2.0) - 2.0), 1e-15);
  EXPECT_NEAR(fgn_autocorrelation(0.25, 1), -0.29289, 1e-5);
  EXPECT_DOUBLE_EQ(fgn_autocorrelation(0.25, 0), 1.0);
  EXPECT_NEAR(fgn_autocorrelation(0.5, 3), 0.0, 1e-15);
}

void check_empirical_covariance(const UniformGrid& grid) {
  const FbmGenerator gen(0.25, grid);
  const std::size_t R = 10000, n = grid.m() + 1;
  std::vector<PathSample> paths;
  for (std::size_t r = 0; r < R; ++r) paths.push_back(gen.sample(substream(31, r)));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (const auto& p : paths) s += p[i] * p[j];
      const double cij = fbm_covariance(0.25, grid.point(i), grid.point(j));
      const double cii = fbm_covariance(0.25, grid.point(i), grid.point(i));
      const double cjj = fbm_covariance(0.25, grid.point(j), grid.point(j));
      const double se = std::sqrt((cii * cjj + cij * cij) / R);
      EXPECT_NEAR(s / R, cij, 4.0 * se + 1e-15) << i << ',' << j;
    }
  }
}

TEST(Fbm, EmpiricalCovarianceFromZero) { check_empirical_covariance(uniform_grid(0.0, 1.0, 15)); }
TEST(Fbm, EmpiricalCovarianceAwayFromZero) { check_empirical_covariance(uniform_grid(0.25, 1.0, 15)); }

TEST(Fbm, ScaledIncrementsAreStandardWithLagCorrelation) {
  // n^{1/4} (B(j/n) - B((j-1)/n)) has variance 1 and lag-1 correlation r(1).
  const std::size_t n = 256, R = 400;
  const FbmGenerator gen(0.25, uniform_grid(0.0, 1.0, n));
  double v = 0.0, c = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    const auto inc = increments(gen.sample(substream(2, r)));
    for (std::size_t j = 0; j < n; ++j) {
      const double a = std::pow(double(n), 0.25) * inc[j];
      v += a * a;
      if (j + 1 < n) c += a * std::pow(double(n), 0.25) * inc[j + 1];
    }
  }
  EXPECT_NEAR(v / (R * n), 1.0, 0.02);
  EXPECT_NEAR(c / (R * (n - 1)), fgn_autocorrelation(0.25, 1), 0.02);
}

TEST(Fbm, QuarticVariationExact) {
  // V4 on [0, 1] -> 3 for H = 1/4; n = 2^12, 200 replications, within 2%.
  const FbmGenerator gen(0.25, uniform_grid(0.0, 1.0, 4096));
  ASSERT_TRUE(gen.exact());
  std::vector<double> v(200);
  parallel_for(v.size(), [&](std::size_t r) { v[r] = power_variation(gen.sample(substream(3, r)), 4.0); });
  EXPECT_NEAR(mean_of(v), 3.0, 0.06);
}

TEST(Fbm, QuarticVariationCirculant) {
  const FbmGenerator gen(0.25, uniform_grid(0.0, 2.0, 16384));
  ASSERT_FALSE(gen.exact());
  std::vector<double> v(100);
  parallel_for(v.size(), [&](std::size_t r) { v[r] = power_variation(gen.sample(substream(4, r)), 4.0); });
  EXPECT_NEAR(mean_of(v), 3.0 * 2.0, 0.06);
}

TEST(Fbm, CirculantWithOffsetKeepsIncrementLaw) {
  const FbmGenerator gen(0.25, uniform_grid(0.5, 1.5, 8192));
  ASSERT_FALSE(gen.exact());
  std::vector<double> v(50), start(2000);
  for (std::size_t r = 0; r < v.size(); ++r) v[r] = power_variation(gen.sample(substream(6, r)), 4.0);
  EXPECT_NEAR(mean_of(v), 3.0, 0.06);
  const FbmGenerator small(0.25, uniform_grid(0.5, 1.5, 4097));
  for (std::size_t r = 0; r < start.size(); ++r) {
    const double x = small.sample(substream(7, r))[0];
    start[r] = x * x;
  }
  EXPECT_NEAR(mean_of(start), std::sqrt(0.5), 4.0 * std::sqrt(0.5) * std::sqrt(2.0 / 2000));
}

TEST(Fbm, Preconditions) {
  EXPECT_THROW(FbmGenerator(0.0, uniform_grid(0, 1, 4)), std::invalid_argument);
  EXPECT_THROW(FbmGenerator(0.25, uniform_grid(-1, 1, 4)), std::invalid_argument);
  const FbmSpec spec{0.25, uniform_grid(0, 1, 8), 5};
  EXPECT_EQ(fbm_path(spec).values()[3], fbm_path(spec).values()[3]);
}

TEST(Brownian, QuadraticVariation) {
  // scale = 1 on [0, 1], m = 10^4: V2 = 1 +/- 3 sqrt(2/m).
  const auto p = brownian_path(uniform_grid(0.0, 1.0, 10000), 1.0, 8);
  EXPECT_EQ(p[0], 0.0);
  EXPECT_NEAR(power_variation(p, 2.0), 1.0, 3.0 * std::sqrt(2.0 / 10000));
}

TEST(Brownian, TwoSidedBranchesAreIndependent) {
  const auto grid = uniform_grid(-1.0, 1.0, 4);
  const std::size_t R = 20000;
  double vl = 0, vr = 0, c = 0;
  for (std::size_t r = 0; r < R; ++r) {
    const auto p = brownian_path(grid, 2.0, substream(9, r));
    EXPECT_EQ(p[2], 0.0);
    vl += p[0] * p[0];
    vr += p[4] * p[4];
    c += p[0] * p[4];
  }
  EXPECT_NEAR(vl / R, 4.0, 4.0 * 4.0 * std::sqrt(2.0 / R));
  EXPECT_NEAR(vr / R, 4.0, 4.0 * 4.0 * std::sqrt(2.0 / R));
  EXPECT_NEAR(c / R, 0.0, 4.0 * 4.0 / std::sqrt(double(R)));
}

TEST(Brownian, RejectsNonpositiveScale) {
  EXPECT_THROW(brownian_path(uniform_grid(0, 1, 4), 0.0, 1), std::invalid_argument);
}

TEST(Smooth, PolynomialExample) {
  const SmoothPerturbation y{PerturbationKind::Polynomial, {0.0, 0.0, 1.0}};
  const auto p = smooth_path(y, uniform_grid(0.0, 1.0, 4));
  const std::vector<double> expected{0.0, 1.0 / 16, 0.25, 9.0 / 16, 1.0};
  for (std::size_t j = 0; j < 5; ++j) EXPECT_DOUBLE_EQ(p[j], expected[j]);
  EXPECT_DOUBLE_EQ(y.first_derivative_bound(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(y.second_derivative_bound(0, 1), 2.0);
}

TEST(Smooth, ZeroCoefficientsGiveZeroPath) {
  for (auto kind : {PerturbationKind::Polynomial, PerturbationKind::TrigSeries, PerturbationKind::ExpDecaySeries}) {
    const auto p = smooth_path(SmoothPerturbation{kind, {0.0, 0.0}}, uniform_grid(0, 1, 5));
    for (double v : p.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(Smooth, LipschitzBoundOnQuadraticVariation) {
  const double a = 0.7;
  const SmoothPerturbation y{PerturbationKind::TrigSeries, {a}};
  for (std::size_t m : {10, 100, 1000}) {
    const double v = power_variation(smooth_path(y, uniform_grid(0.0, 3.14159265358979323846, m)), 2.0);
    const double M = y.first_derivative_bound(0, 3.14159265358979323846);
    EXPECT_LE(v, m * std::pow(M * 3.14159265358979323846 / m, 2) * (1 + 1e-12));
  }
}

TEST(Smooth, DerivativeBoundsDominateFiniteDifferences) {
  const SmoothPerturbation polys{PerturbationKind::Polynomial, {1.0, -2.0, 0.5, 0.25}};
  const SmoothPerturbation exps{PerturbationKind::ExpDecaySeries, {1.0, -0.5, 2.0}};
  const SmoothPerturbation trig{PerturbationKind::TrigSeries, {1.0, -0.5, 0.3}};
  for (const auto* y : {&polys, &exps, &trig}) {
    const double a = -0.5, b = 1.5, h = 1e-4;
    double d1 = 0, d2 = 0;
    for (double x = a + h; x < b - h; x += 0.01) {
      d1 = std::max(d1, std::fabs(((*y)(x + h) - (*y)(x - h)) / (2 * h)));
      d2 = std::max(d2, std::fabs(((*y)(x + h) - 2 * (*y)(x) + (*y)(x - h)) / (h * h)));
    }
    EXPECT_LE(d1, y->first_derivative_bound(a, b) + 1e-6);
    EXPECT_LE(d2, y->second_derivative_bound(a, b) + 1e-4);
  }
}

TEST(WholeLine, TimeSectionQuarticVariation) {
  // theta = sigma = 1: V4 on [c, d] -> 3 (d - c) / pi.
  const HeatModel m = make_model(1.0, 1.0, Domain::WholeLine);
  const auto grid = uniform_grid(1.0, 2.0, 4096);
  const FbmGenerator gen(0.25, grid);
  std::vector<double> v(40);
  parallel_for(v.size(), [&](std::size_t r) {
    v[r] = power_variation(wholeline_solution_time_section(m, SmoothPerturbation{}, gen, substream(12, r)), 4.0);
  });
  EXPECT_NEAR(mean_of(v), 3.0 / kPi, 0.03 * 3.0 / kPi);
}

TEST(WholeLine, SpaceSectionQuadraticVariation) {
  // theta = 0.1, sigma = 0.2 on [0, pi]: V2 -> sigma^2 pi / (2 theta) = 0.62832.
  const HeatModel m = make_model(0.1, 0.2, Domain::WholeLine);
  const auto p = wholeline_solution_space_section(m, SmoothPerturbation{}, uniform_grid(0.0, kPi, 100000), 13);
  EXPECT_NEAR(power_variation(p, 2.0), 0.62832, 4.0 * 0.62832 * std::sqrt(2.0 / 100000));
}

TEST(WholeLine, MinkowskiSandwich) {
  const HeatModel m = make_model(0.1, 0.2, Domain::WholeLine);
  const SmoothPerturbation y{PerturbationKind::Polynomial, {0.0, 0.0, 0.5}};
  const auto grid = uniform_grid(-1.0, 2.0, 500);
  const double vy = std::sqrt(power_variation(smooth_path(y, grid), 2.0));
  for (std::uint64_t s = 0; s < 20; ++s) {
    const double vx = std::sqrt(power_variation(wholeline_solution_space_section(m, {}, grid, s), 2.0));
    const double vxy = std::sqrt(power_variation(wholeline_solution_space_section(m, y, grid, s), 2.0));
    EXPECT_LE(std::fabs(vxy - vx), vy * (1 + 1e-12));
  }
}

TEST(WholeLine, TimeSectionNeedsPositiveStart) {
  const HeatModel m = make_model(0.1, 0.2, Domain::WholeLine);
  EXPECT_THROW(wholeline_solution_time_section(m, {}, uniform_grid(0.0, 1.0, 8), 1), std::invalid_argument);
}

}  // namespace
}  // namespace heatvar
