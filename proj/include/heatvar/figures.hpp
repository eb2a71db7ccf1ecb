#pragma once

// Data and SVG charts for the five standard figures:
//   1  single-path theta_tilde and sigma2_tilde against m, t in {0.4, 1}
//   2  Monte Carlo means of the same, R replications
//   3  Monte Carlo standard deviations with the theoretical curves
//   4  estimates averaged over the time sections t_i = i/n, n in {100, 500}
//   5  joint estimates from a time section at x = pi/2 and a space section
//      at t = 1, n in {100, 400, 500}
// Every figure sweeps m = 50, 100, ..., 2000 on [0, pi].

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace heatvar {

struct FigureOptions {
  double theta = 0.1;
  double sigma = 0.2;
  std::size_t modes = 15000;
  std::size_t replications = 1000;
  std::uint64_t seed = 42;

  /// fast: 2000 modes and 100 replications.
  static FigureOptions defaults(bool fast);
};

std::vector<std::size_t> figure_m_sweep();

/// CSV text of figure id (1..5).
std::string figure_csv(int id, const FigureOptions& options);

/// SVG of figure id drawn from its CSV text.
std::string render_figure(int id, const std::string& csv, const FigureOptions& options);

/// Writes fig<id>.csv and fig<id>.svg into out_dir; returns the CSV path.
std::string reproduce_figure(int id, const FigureOptions& options, const std::string& out_dir);

}  // namespace heatvar
