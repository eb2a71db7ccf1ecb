#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "heatvar/kernels.hpp"
#include "heatvar/rng.hpp"

namespace heatvar {
namespace {

class ThreadGuard {
 public:
  ThreadGuard() : saved_(max_threads()) {}
  ~ThreadGuard() { set_threads(saved_); }

 private:
  int saved_;
};

TEST(Rng, SubstreamsAreDeterministicAndDistinct) {
  EXPECT_EQ(substream(1, 2), substream(1, 2));
  std::set<std::uint64_t> seen;
  for (std::uint64_t k = 0; k < 1000; ++k) seen.insert(substream(42, k));
  EXPECT_EQ(seen.size(), 1000u);
  EXPECT_NE(substream(1, 0), substream(2, 0));
}

TEST(Rng, StreamReproducesItself) {
  NormalStream a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 100; ++i) {
    const double x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
}

TEST(Rng, NormalMoments) {
  NormalStream z(123);
  const int n = 200000;
  double s1 = 0, s2 = 0, s4 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = z();
    s1 += x;
    s2 += x * x;
    s4 += x * x * x * x;
  }
  EXPECT_NEAR(s1 / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(s2 / n, 1.0, 4.0 * std::sqrt(2.0 / n));
  EXPECT_NEAR(s4 / n, 3.0, 4.0 * std::sqrt(96.0 / n));
}

std::vector<OuMode> test_modes(std::size_t K, double theta, double sigma, double dt) {
  std::vector<OuMode> modes;
  for (std::size_t k = 1; k <= K; ++k) {
    const double r = theta * k * k;
    const double a = std::exp(-r * dt);
    modes.push_back({k, std::sin(0.7 * k), sigma / std::sqrt(2 * r), a, sigma * std::sqrt((1 - a * a) / (2 * r))});
  }
  return modes;
}

TEST(Kernels, OuAccumulationMatchesSerialReference) {
  const auto modes = test_modes(1000, 0.1, 0.2, 1e-3);
  std::vector<double> par(65), ref(65);
  accumulate_ou_modes(modes, 64, 99, par);
  reference::accumulate_ou_modes(modes, 64, 99, ref);
  for (std::size_t i = 0; i < par.size(); ++i) EXPECT_NEAR(par[i], ref[i], 1e-13);
}

TEST(Kernels, OuAccumulationIndependentOfThreadCount) {
  ThreadGuard guard;
  const auto modes = test_modes(1500, 0.1, 0.2, 1e-3);
  std::vector<double> one(33), eight(33);
  set_threads(1);
  accumulate_ou_modes(modes, 32, 5, one);
  set_threads(8);
  accumulate_ou_modes(modes, 32, 5, eight);
  EXPECT_EQ(one, eight);
}

TEST(Kernels, OuAccumulationChecksLength) {
  const auto modes = test_modes(3, 0.1, 0.2, 1e-3);
  std::vector<double> out(5);
  EXPECT_THROW(accumulate_ou_modes(modes, 5, 1, out), std::invalid_argument);
}

TEST(Kernels, ParallelSumIndependentOfThreadCount) {
  ThreadGuard guard;
  auto f = [](std::size_t i) { return 1.0 / (1.0 + static_cast<double>(i)); };
  set_threads(1);
  const double one = parallel_sum(0, 100000, f);
  set_threads(8);
  const double eight = parallel_sum(0, 100000, f);
  EXPECT_EQ(one, eight);
  EXPECT_NEAR(one, reference::serial_sum(0, 100000, f), 1e-12);
}

TEST(Kernels, ParallelForRethrowsLowestIndex) {
  ThreadGuard guard;
  set_threads(4);
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60) throw std::runtime_error(std::to_string(i));
    });
    FAIL() << "expected an exception";
  } catch (const std::runtime_error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
}

}  // namespace
}  // namespace heatvar
