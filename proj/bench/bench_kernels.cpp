#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

#include "heatvar/gaussian_refs.hpp"
#include "heatvar/kernels.hpp"
#include "heatvar/spectral.hpp"

namespace {

using namespace heatvar;

std::vector<OuMode> make_modes(std::size_t K, double dt) {
  const double theta = 0.1, sigma = 0.2, x = kPi / 2;
  std::vector<OuMode> modes;
  for (std::size_t k = 1; k <= K; ++k) {
    const double lk = theta * static_cast<double>(k * k);
    const double decay = std::exp(-lk * dt);
    const double s = sigma * std::sqrt((1.0 - decay * decay) / (2.0 * lk));
    modes.push_back({k, eigenfunction(k, x), 0.0, decay, s});
  }
  return modes;
}

void BM_OuModesParallel(benchmark::State& state) {
  const auto modes = make_modes(static_cast<std::size_t>(state.range(0)), 1e-3);
  std::vector<double> out(1001);
  for (auto _ : state) {
    accumulate_ou_modes(modes, 1000, 7, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_OuModesSerial(benchmark::State& state) {
  const auto modes = make_modes(static_cast<std::size_t>(state.range(0)), 1e-3);
  std::vector<double> out(1001);
  for (auto _ : state) {
    reference::accumulate_ou_modes(modes, 1000, 7, out);
    benchmark::DoNotOptimize(out.data());
  }
}

double term(std::size_t i) {
  const double k = static_cast<double>(i + 1);
  return std::sin(k) * std::sin(k) / (k * k);
}

void BM_SumParallel(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(parallel_sum(0, n, term));
}

void BM_SumSerial(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reference::serial_sum(0, n, term));
}

void BM_FbmSample(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const FbmGenerator gen(0.25, uniform_grid(0.0, 1.0, n));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(gen.sample(seed++).values().data());
}

BENCHMARK(BM_OuModesParallel)->Arg(256)->Arg(2048);
BENCHMARK(BM_OuModesSerial)->Arg(256)->Arg(2048);
BENCHMARK(BM_SumParallel)->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_SumSerial)->Arg(1 << 16)->Arg(1 << 22);
BENCHMARK(BM_FbmSample)->Arg(1024)->Arg(1 << 16);

}  // namespace

BENCHMARK_MAIN();
