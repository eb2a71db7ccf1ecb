#pragma once

// Spectral simulation of du = theta u_xx dt + sigma dW on [0, pi] with zero
// Dirichlet boundary values and zero initial data. The solution is
// u(t,x) = sum_k u_k(t) h_k(x), h_k(x) = sqrt(2/pi) sin(kx), where each u_k is
// an independent OU process with rate theta k^2 and noise sigma.
//
// Fourier mode k always draws from random stream substream(seed, k), so a run
// with more modes reproduces every mode of a run with fewer.
//
// TailMode::Exact adds the law of the discarded modes k > K back in:
//  * space sections: exact Gaussian remainder on the grid (closed-form
//    covariance), via sine aliasing on [0, pi] grids or LDLT elsewhere;
//  * time sections: the discarded modes decorrelate within one step once
//    theta (K+1)^2 dt is large, so they form an independent Gaussian sequence
//    with exactly known variance. K is set to the smallest value meeting
//    that condition.
// TailMode::Truncate keeps the plain K-term sum.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "heatvar/grid.hpp"
#include "heatvar/kernels.hpp"
#include "heatvar/rng.hpp"

namespace heatvar {

enum class Domain { BoundedZeroPi, WholeLine };
enum class TailMode { Exact, Truncate };

struct HeatModel {
  double theta = 0.1;
  double sigma = 0.2;
  Domain domain = Domain::BoundedZeroPi;
  std::size_t modes = 15000;

  /// Throws std::invalid_argument unless theta > 0, sigma > 0, modes >= 1.
  void validate() const;
};

HeatModel make_model(double theta, double sigma, Domain domain = Domain::BoundedZeroPi,
                     std::size_t modes = 15000);

inline constexpr double kPi = 3.14159265358979323846;

/// sqrt(2/pi) sin(kx); domain error outside [0, pi].
double eigenfunction(std::size_t k, double x);

/// Var u_k(t) = (1 - exp(-2 theta k^2 t)) sigma^2 / (2 theta k^2).
double mode_variance(const HeatModel& model, std::size_t k, double t);

/// Upper bound sigma^2 / (pi theta K) on the pointwise variance of the modes k > K.
double pointwise_tail_bound(const HeatModel& model, std::size_t modes);

/// Smallest K with exp(-theta (K+1)^2 dt) <= exp(-28): modes above K are
/// uncorrelated from one time step to the next at double precision. In Exact
/// mode a time section simulates exactly this many modes explicitly.
std::size_t white_remainder_modes(double theta, double dt);

/// Variance at time t of sum_{k>K} u_k(t) h_k(x), 0 < x < pi.
double time_section_remainder_variance(const HeatModel& model, double x, std::size_t K, double t);

/// Fourier coefficients u_k(t_i), k = 1..K, i = 0..n, stored mode-major.
struct SpectralState {
  HeatModel model;
  UniformGrid time_grid;
  std::uint64_t seed = 0;
  std::vector<double> coeffs;

  std::size_t modes() const { return model.modes; }
  std::size_t steps() const { return time_grid.m(); }
  double coeff(std::size_t k, std::size_t i) const { return coeffs[(k - 1) * (steps() + 1) + i]; }
  std::span<const double> mode_path(std::size_t k) const {
    return std::span<const double>(coeffs).subspan((k - 1) * (steps() + 1), steps() + 1);
  }
};

/// Exact OU transitions for every mode on time_grid (which must start at 0).
SpectralState simulate_modes(const HeatModel& model, const UniformGrid& time_grid, std::uint64_t seed);

/// values[i] = sum_{k<=K} u_k(t_i) h_k(x); 0 < x < pi.
PathSample evaluate_at_x(const SpectralState& state, double x);

// State file: '#' header lines with theta, sigma, K, n, T, seed, then "k,i,u" rows.
void write_state_csv(std::ostream& out, const SpectralState& state);
SpectralState read_state_csv(std::istream& in);

/// Precomputed data for drawing u(t, .) on one space grid: the remainder law
/// of the modes above K and, for [0, pi] grids, a DST-I plan. Immutable after
/// construction and safe to share between threads.
class SpaceSectionPlan {
 public:
  SpaceSectionPlan(const HeatModel& model, double t, const UniformGrid& grid, TailMode tail);
  ~SpaceSectionPlan();
  SpaceSectionPlan(const SpaceSectionPlan&) = delete;
  SpaceSectionPlan& operator=(const SpaceSectionPlan&) = delete;

  const UniformGrid& grid() const { return grid_; }
  double time() const { return t_; }
  bool aliased() const { return aliased_; }
  std::uint64_t stream_tag() const { return tag_; }

  /// u(t, x_j) given the retained coefficients u_1..u_K at time t.
  PathSample evaluate(std::span<const double> coeffs, std::uint64_t seed) const;

  /// Variance of the folded remainder coefficient r (aliased plans only).
  double remainder_variance(std::size_t r) const { return remainder_var_.at(r); }

  /// True when the remainder law no longer depends on time (the transient
  /// part of every discarded mode has decayed below double precision), so the
  /// plan is valid for any later time as well.
  bool stationary_tail() const { return stationary_; }

 private:
  struct Impl;
  HeatModel model_;
  double t_;
  UniformGrid grid_;
  TailMode tail_;
  bool aliased_;
  std::uint64_t tag_;
  bool stationary_ = false;
  std::vector<double> remainder_var_;  // aliased: index r = 1..m-1
  std::unique_ptr<Impl> impl_;
};

/// Retained Fourier coefficients u_1..u_K at a current time, advanced by exact
/// OU transitions; each mode owns its random stream.
class ModeField {
 public:
  ModeField(const HeatModel& model, std::uint64_t seed);

  /// Draws u_k(t) from its exact marginal (independent in k).
  void draw_marginal(double t);
  /// Exact transition over dt for every mode.
  void advance(double dt);

  double time() const { return t_; }
  std::span<const double> coefficients() const { return u_; }
  std::uint64_t seed() const { return seed_; }

  PathSample space_section(const SpaceSectionPlan& plan) const;

 private:
  HeatModel model_;
  std::uint64_t seed_;
  double t_ = 0.0;
  std::vector<double> u_;
  std::uint64_t draws_ = 0;
  std::vector<NormalStream> streams_;
};

/// u_1(t)..u_K(t) drawn from their exact marginals; mode k uses stream k.
std::vector<double> draw_mode_marginals(const HeatModel& model, double t, std::uint64_t seed);

/// One-shot exact sampler of u(t, .) on space_grid.
PathSample sample_fixed_time(const HeatModel& model, double t, const UniformGrid& space_grid,
                             std::uint64_t seed, TailMode tail = TailMode::Exact);

/// u(., x) on a time grid [c, d], c >= 0: exact marginal draw at c, exact OU
/// steps afterwards, plus the remainder sequence in Exact mode.
class TimeSectionSampler {
 public:
  TimeSectionSampler(const HeatModel& model, double x, const UniformGrid& time_grid,
                     TailMode tail = TailMode::Exact);

  PathSample sample(std::uint64_t seed) const;
  PathSample sample_reference(std::uint64_t seed) const;  // serial kernel

  std::size_t effective_modes() const { return effective_modes_; }
  std::span<const double> remainder_variance() const { return remainder_var_; }
  const UniformGrid& grid() const { return grid_; }

 private:
  PathSample finish(std::vector<double> values, std::uint64_t seed) const;

  HeatModel model_;
  double x_;
  UniformGrid grid_;
  TailMode tail_;
  std::size_t effective_modes_;
  std::vector<OuMode> modes_;
  std::vector<double> remainder_var_;
};

}  // namespace heatvar
