#pragma once

// Exact generators for Brownian motion, fractional Brownian motion and smooth
// deterministic perturbations, and the whole-line solution surrogates built
// from them:
//   time section  u(t, x) = sigma / (theta pi)^{1/4} B^H(t) + Y(t),  H = 1/4
//   space section u(t, x) = sigma / sqrt(2 theta) B(x) + Y(x)

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "heatvar/grid.hpp"
#include "heatvar/spectral.hpp"

namespace heatvar {

/// Grids up to this size use a Cholesky factor of the covariance matrix;
/// larger grids use circulant embedding.
inline constexpr std::size_t kExactFbmCap = 4096;

struct FbmSpec {
  double hurst = 0.25;
  UniformGrid grid;
  std::uint64_t seed = 0;
};

/// E[B^H(s) B^H(t)] = (|s|^{2H} + |t|^{2H} - |t - s|^{2H}) / 2.
double fbm_covariance(double hurst, double s, double t);

/// Correlation of unit-mesh fBM increments at lag j.
double fgn_autocorrelation(double hurst, std::size_t j);

/// fBM sampler on one grid (a >= 0). The covariance factorization is done
/// once; sample() is const and thread-safe.
///
/// For a = 0 the increments are generated (Toeplitz covariance) and summed;
/// for a > 0 the values are generated jointly. Above kExactFbmCap the
/// increments come from Davies-Harte circulant embedding, and for a > 0 the
/// starting value B^H(a) is then drawn independently of the increments,
/// which is exact for the increments but not for their covariance with B^H(a).
class FbmGenerator {
 public:
  FbmGenerator(double hurst, const UniformGrid& grid);
  ~FbmGenerator();
  FbmGenerator(FbmGenerator&&) noexcept;
  FbmGenerator& operator=(FbmGenerator&&) noexcept;

  PathSample sample(std::uint64_t seed) const;
  bool exact() const { return exact_; }
  double hurst() const { return hurst_; }
  const UniformGrid& grid() const { return grid_; }

 private:
  struct Impl;
  double hurst_;
  UniformGrid grid_;
  bool exact_;
  std::unique_ptr<Impl> impl_;
};

PathSample fbm_path(const FbmSpec& spec);

/// Brownian motion (two-sided when a < 0) times scale on grid; B(0) = 0.
PathSample brownian_path(const UniformGrid& grid, double scale, std::uint64_t seed);

enum class PerturbationKind { Polynomial, TrigSeries, ExpDecaySeries };

/// Y(x) = sum_i c_i x^i           (Polynomial)
///      = sum_i c_i sin((i+1) x)  (TrigSeries)
///      = sum_i c_i exp(-(i+1) x) (ExpDecaySeries)
struct SmoothPerturbation {
  PerturbationKind kind = PerturbationKind::Polynomial;
  std::vector<double> coefficients;

  double operator()(double x) const;
  /// Upper bounds of sup |Y'| and sup |Y''| over [a, b].
  double first_derivative_bound(double a, double b) const;
  double second_derivative_bound(double a, double b) const;
};

PathSample smooth_path(const SmoothPerturbation& pert, const UniformGrid& grid);

/// Requires c = grid.a() > 0.
PathSample wholeline_solution_time_section(const HeatModel& model, const SmoothPerturbation& pert,
                                           const UniformGrid& grid, std::uint64_t seed);
/// Same, reusing a generator built for grid and H = 1/4.
PathSample wholeline_solution_time_section(const HeatModel& model, const SmoothPerturbation& pert,
                                           const FbmGenerator& fbm, std::uint64_t seed);

PathSample wholeline_solution_space_section(const HeatModel& model, const SmoothPerturbation& pert,
                                            const UniformGrid& grid, std::uint64_t seed);

}  // namespace heatvar
