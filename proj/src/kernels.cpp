#include "heatvar/kernels.hpp"

#include <algorithm>
#include <stdexcept>

#include <omp.h>

#include "heatvar/rng.hpp"

namespace heatvar {

void set_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

namespace {

// Adds weight * u(t_i) for one mode into acc[0..steps].
inline void add_mode_path(const OuMode& mode, std::size_t steps, std::uint64_t seed, double* acc) {
  NormalStream z(seed, mode.k);
  double u = mode.initial_std > 0.0 ? mode.initial_std * z() : 0.0;
  const double w = mode.weight;
  const double a = mode.decay;
  const double s = mode.noise_std;
  acc[0] += w * u;
  for (std::size_t i = 1; i <= steps; ++i) {
    u = a * u + s * z();
    acc[i] += w * u;
  }
}

void check_out(std::span<double> out, std::size_t steps) {
  if (out.size() != steps + 1) throw std::invalid_argument("output length must be steps + 1");
}

}  // namespace

void accumulate_ou_modes(std::span<const OuMode> modes, std::size_t steps, std::uint64_t seed,
                         std::span<double> out) {
  check_out(out, steps);
  const std::size_t blocks = (modes.size() + kModeBlock - 1) / kModeBlock;
  std::vector<std::vector<double>> partial(blocks);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t b = 0; b < blocks; ++b) {
    std::vector<double> acc(steps + 1, 0.0);
    const std::size_t hi = std::min(modes.size(), (b + 1) * kModeBlock);
    for (std::size_t j = b * kModeBlock; j < hi; ++j) add_mode_path(modes[j], steps, seed, acc.data());
    partial[b] = std::move(acc);
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& acc : partial) {
    for (std::size_t i = 0; i <= steps; ++i) out[i] += acc[i];
  }
}

namespace reference {

void accumulate_ou_modes(std::span<const OuMode> modes, std::size_t steps, std::uint64_t seed,
                         std::span<double> out) {
  check_out(out, steps);
  std::fill(out.begin(), out.end(), 0.0);
  for (const auto& mode : modes) add_mode_path(mode, steps, seed, out.data());
}

}  // namespace reference

}  // namespace heatvar
