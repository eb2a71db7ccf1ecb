#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "heatvar/grid.hpp"

namespace heatvar {
namespace {

TEST(UniformGrid, EndpointsAreExact) {
  const auto g = uniform_grid(0.1, 0.7, 3);
  EXPECT_EQ(g.point(0), 0.1);
  EXPECT_EQ(g.point(3), 0.7);
  EXPECT_NEAR(g.point(1), 0.3, 1e-15);
  EXPECT_NEAR(g.mesh(), 0.2, 1e-15);
  EXPECT_EQ(g.points().size(), 4u);
}

TEST(UniformGrid, RejectsBadIntervals) {
  EXPECT_THROW(uniform_grid(1.0, 1.0, 4), std::domain_error);
  EXPECT_THROW(uniform_grid(2.0, 1.0, 4), std::domain_error);
  EXPECT_THROW(uniform_grid(0.0, 1.0, 0), std::domain_error);
}

TEST(PathSample, SizeMustMatchGrid) {
  EXPECT_THROW(PathSample(uniform_grid(0, 1, 4), std::vector<double>(4)), std::invalid_argument);
}

TEST(PowerVariation, LinearPath) {
  // x -> 2x on [0,1], m = 4: four increments of 0.5.
  const PathSample s(uniform_grid(0, 1, 4), {0.0, 0.5, 1.0, 1.5, 2.0});
  EXPECT_DOUBLE_EQ(power_variation(s, 2.0), 1.0);
  EXPECT_DOUBLE_EQ(power_variation(s, 4.0), 0.25);
  EXPECT_DOUBLE_EQ(power_variation(s, 1.0), 2.0);
  EXPECT_NEAR(power_variation(s, 3.0), 0.5, 1e-15);
}

TEST(PowerVariation, MatchesNaiveSumForGeneralP) {
  std::vector<double> v;
  for (int j = 0; j <= 50; ++j) v.push_back(std::sin(0.37 * j) + 0.01 * j * j);
  for (double p : {1.0, 1.5, 2.0, 2.5, 4.0}) {
    double naive = 0.0;
    for (std::size_t j = 1; j < v.size(); ++j) naive += std::pow(std::fabs(v[j] - v[j - 1]), p);
    EXPECT_NEAR(power_variation(v, p), naive, 1e-12 * naive) << "p=" << p;
  }
}

TEST(PowerVariation, RejectsPBelowOne) {
  const PathSample s(uniform_grid(0, 1, 1), {0.0, 1.0});
  EXPECT_THROW(power_variation(s, 0.5), std::domain_error);
}

TEST(Increments, Differences) {
  const PathSample s(uniform_grid(0, 1, 3), {1.0, 3.0, 2.0, 2.0});
  EXPECT_EQ(increments(s), (std::vector<double>{2.0, -1.0, 0.0}));
}

TEST(CompensatedSum, RecoversCancelledTerms) {
  CompensatedSum s;
  s.add(1.0);
  s.add(1e100);
  s.add(1.0);
  s.add(-1e100);
  EXPECT_EQ(s.value(), 2.0);
}

TEST(PathCsv, RoundTripIsExact) {
  std::vector<double> v;
  for (int j = 0; j <= 10; ++j) v.push_back(std::exp(-0.3 * j) / 3.0);
  const PathSample s(uniform_grid(0.25, 1.0, 10), v);
  std::stringstream buf;
  write_path_csv(buf, s, "t");
  EXPECT_EQ(buf.str().rfind("t,value\n", 0), 0u);
  const PathSample back = read_path_csv(buf);
  EXPECT_EQ(back.grid().m(), 10u);
  EXPECT_EQ(back.grid().a(), 0.25);
  EXPECT_EQ(back.grid().b(), 1.0);
  for (std::size_t j = 0; j < v.size(); ++j) EXPECT_EQ(back[j], v[j]);
}

TEST(PathCsv, RejectsNonUniformAbscissae) {
  std::stringstream buf("x,value\n0,1\n0.5,2\n0.6,3\n");
  EXPECT_THROW(read_path_csv(buf), std::runtime_error);
}

}  // namespace
}  // namespace heatvar
