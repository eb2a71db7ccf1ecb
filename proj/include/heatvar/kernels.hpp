#pragma once

// Data-parallel kernels. Every parallel kernel splits its index range into
// fixed-size blocks that do not depend on the thread count and combines the
// block results in block order, so output is bit-identical for any number of
// OpenMP threads. The `reference` namespace keeps plain serial versions that
// the tests compare against.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <span>
#include <vector>

#include "heatvar/grid.hpp"

namespace heatvar {

/// Sets the OpenMP thread count used by all kernels (n <= 0 keeps the default).
void set_threads(int n);
int max_threads();

/// One Ornstein-Uhlenbeck Fourier mode observed at a fixed space point.
struct OuMode {
  std::uint64_t k;      // mode index, also the random stream index
  double weight;        // h_k(x)
  double initial_std;   // std of u_k at the first grid time (0 for zero start)
  double decay;         // exp(-theta k^2 dt)
  double noise_std;     // sigma sqrt((1 - decay^2) / (2 theta k^2))
};

inline constexpr std::size_t kModeBlock = 256;
inline constexpr std::size_t kSumBlock = 4096;

/// out[i] = sum_k weight_k u_k(t_i), i = 0..steps, each u_k simulated with its
/// exact OU transition from stream substream(seed, k).
void accumulate_ou_modes(std::span<const OuMode> modes, std::size_t steps, std::uint64_t seed,
                         std::span<double> out);

/// Compensated sum of f(i) for i in [first, last), evaluated in parallel.
template <class F>
double parallel_sum(std::size_t first, std::size_t last, F&& f) {
  if (last <= first) return 0.0;
  const std::size_t count = last - first;
  const std::size_t blocks = (count + kSumBlock - 1) / kSumBlock;
  std::vector<CompensatedSum> partial(blocks);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t lo = first + b * kSumBlock;
    const std::size_t hi = lo + kSumBlock < last ? lo + kSumBlock : last;
    CompensatedSum s;
    for (std::size_t i = lo; i < hi; ++i) s.add(f(i));
    partial[b] = s;
  }
  CompensatedSum total;
  for (const auto& p : partial) total.add(p);
  return total.value();
}

/// Calls f(i) for every i in [0, count); f must write only to slot i of its output.
/// If some calls throw, the exception of the lowest index is rethrown.
template <class F>
void parallel_for(std::size_t count, F&& f) {
  std::exception_ptr error;
  std::size_t error_index = count;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < count; ++i) {
    try {
      f(i);
    } catch (...) {
#pragma omp critical(heatvar_parallel_for)
      if (i < error_index) {
        error_index = i;
        error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

namespace reference {

void accumulate_ou_modes(std::span<const OuMode> modes, std::size_t steps, std::uint64_t seed,
                         std::span<double> out);

template <class F>
double serial_sum(std::size_t first, std::size_t last, F&& f) {
  CompensatedSum s;
  for (std::size_t i = first; i < last; ++i) s.add(f(i));
  return s.value();
}

}  // namespace reference

}  // namespace heatvar
