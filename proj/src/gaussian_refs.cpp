#include "heatvar/gaussian_refs.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include <Eigen/Dense>
#include <fftw3.h>

#include "fftw_lock.hpp"
#include "heatvar/rng.hpp"

namespace heatvar {

namespace {

using detail::fftw_planner_mutex;

double abs_pow(double x, double p) { return x == 0.0 ? 0.0 : std::pow(std::fabs(x), p); }

}  // namespace

double fbm_covariance(double hurst, double s, double t) {
  const double h2 = 2.0 * hurst;
  return 0.5 * (abs_pow(s, h2) + abs_pow(t, h2) - abs_pow(t - s, h2));
}

double fgn_autocorrelation(double hurst, std::size_t j) {
  const double h2 = 2.0 * hurst;
  const double jd = static_cast<double>(j);
  return 0.5 * (abs_pow(jd + 1.0, h2) + abs_pow(jd - 1.0, h2) - 2.0 * abs_pow(jd, h2));
}

struct FbmGenerator::Impl {
  Eigen::MatrixXd lower;          // exact path
  std::vector<double> sqrt_eig;   // circulant path, length m + 1 (k = 0..m)
  fftw_plan c2r = nullptr;

  ~Impl() {
    if (c2r) {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fftw_destroy_plan(c2r);
    }
  }
};

FbmGenerator::~FbmGenerator() = default;
FbmGenerator::FbmGenerator(FbmGenerator&&) noexcept = default;
FbmGenerator& FbmGenerator::operator=(FbmGenerator&&) noexcept = default;

FbmGenerator::FbmGenerator(double hurst, const UniformGrid& grid)
    : hurst_(hurst), grid_(grid), exact_(grid.m() <= kExactFbmCap), impl_(std::make_unique<Impl>()) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw std::invalid_argument("Hurst index must lie in (0, 1)");
  if (grid.a() < 0.0) throw std::invalid_argument("fBM grids must start at a >= 0");
  const std::size_t m = grid.m();
  const auto n = static_cast<Eigen::Index>(m);

  if (exact_) {
    Eigen::MatrixXd cov;
    if (grid.a() == 0.0) {
      // Increment covariance in units of mesh^{2H}.
      cov.resize(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          cov(i, j) = fgn_autocorrelation(hurst, static_cast<std::size_t>(std::abs(i - j)));
        }
      }
    } else {
      const auto x = grid.points();
      cov.resize(n + 1, n + 1);
      for (Eigen::Index i = 0; i <= n; ++i) {
        for (Eigen::Index j = 0; j <= n; ++j) cov(i, j) = fbm_covariance(hurst, x[i], x[j]);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("fBM covariance is not numerically positive definite on this grid");
    }
    impl_->lower = llt.matrixL();
    return;
  }

  // Davies-Harte: eigenvalues of the circulant embedding of size M = 2m.
  const std::size_t M = 2 * m;
  std::vector<double> c(M);
  for (std::size_t j = 0; j <= m; ++j) c[j] = fgn_autocorrelation(hurst, j);
  for (std::size_t j = m + 1; j < M; ++j) c[j] = c[M - j];
  std::vector<std::complex<double>> spec(m + 1);
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(M), c.data(),
                                       reinterpret_cast<fftw_complex*>(spec.data()), FFTW_ESTIMATE);
    fftw_execute(p);
    fftw_destroy_plan(p);
    std::vector<std::complex<double>> in(m + 1);
    std::vector<double> out(M);
    impl_->c2r = fftw_plan_dft_c2r_1d(static_cast<int>(M), reinterpret_cast<fftw_complex*>(in.data()), out.data(),
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  impl_->sqrt_eig.resize(m + 1);
  for (std::size_t k = 0; k <= m; ++k) {
    const double lam = spec[k].real();
    if (lam < -1e-10) throw std::runtime_error("circulant embedding is not nonnegative definite");
    impl_->sqrt_eig[k] = std::sqrt(std::max(0.0, lam) / static_cast<double>(M));
  }
}

PathSample FbmGenerator::sample(std::uint64_t seed) const {
  const std::size_t m = grid_.m();
  const double scale = std::pow(grid_.mesh(), hurst_);
  NormalStream z(seed);
  std::vector<double> values(m + 1, 0.0);

  if (exact_ && grid_.a() > 0.0) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(m + 1));
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = z();
    const Eigen::VectorXd x = impl_->lower.triangularView<Eigen::Lower>() * g;
    for (std::size_t j = 0; j <= m; ++j) values[j] = x(static_cast<Eigen::Index>(j));
    return PathSample(grid_, std::move(values));
  }

  std::vector<double> incr(m);
  if (exact_) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(m));
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = z();
    const Eigen::VectorXd x = impl_->lower.triangularView<Eigen::Lower>() * g;
    for (std::size_t j = 0; j < m; ++j) incr[j] = x(static_cast<Eigen::Index>(j));
  } else {
    const std::size_t M = 2 * m;
    std::vector<std::complex<double>> w(m + 1);
    const auto& s = impl_->sqrt_eig;
    w[0] = s[0] * z();
    for (std::size_t k = 1; k < m; ++k) {
      const double re = z();
      const double im = z();
      w[k] = s[k] * std::sqrt(0.5) * std::complex<double>(re, im);
    }
    w[m] = s[m] * z();
    std::vector<double> out(M);
    fftw_execute_dft_c2r(impl_->c2r, reinterpret_cast<fftw_complex*>(w.data()), out.data());
    std::copy(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(m), incr.begin());
  }
  double level = 0.0;
  if (grid_.a() > 0.0) level = std::pow(grid_.a(), hurst_) * z();
  values[0] = level;
  CompensatedSum run;
  run.add(level);
  for (std::size_t j = 0; j < m; ++j) {
    run.add(scale * incr[j]);
    values[j + 1] = run.value();
  }
  return PathSample(grid_, std::move(values));
}

PathSample fbm_path(const FbmSpec& spec) { return FbmGenerator(spec.hurst, spec.grid).sample(spec.seed); }

PathSample brownian_path(const UniformGrid& grid, double scale, std::uint64_t seed) {
  if (!(scale > 0.0)) throw std::invalid_argument("Brownian scale must be positive");
  const std::size_t m = grid.m();
  const auto x = grid.points();
  const double step_sd = scale * std::sqrt(grid.mesh());
  NormalStream z(seed);
  std::vector<double> v(m + 1, 0.0);

  // Index of the first point >= 0 (m + 1 if none).
  std::size_t p = 0;
  while (p <= m && x[p] < 0.0) ++p;
  // Right of zero: forward from B(x_p) ~ N(0, scale^2 x_p).
  if (p <= m) {
    v[p] = x[p] > 0.0 ? scale * std::sqrt(x[p]) * z() : 0.0;
    for (std::size_t j = p + 1; j <= m; ++j) v[j] = v[j - 1] + step_sd * z();
  }
  // Left of zero: the independent branch, backwards from B(x_{p-1}) ~ N(0, scale^2 |x_{p-1}|).
  if (p >= 1) {
    v[p - 1] = scale * std::sqrt(-x[p - 1]) * z();
    for (std::size_t j = p - 1; j-- > 0;) v[j] = v[j + 1] + step_sd * z();
  }
  return PathSample(grid, std::move(v));
}

double SmoothPerturbation::operator()(double x) const {
  double y = 0.0;
  switch (kind) {
    case PerturbationKind::Polynomial:
      for (std::size_t i = coefficients.size(); i-- > 0;) y = y * x + coefficients[i];
      return y;
    case PerturbationKind::TrigSeries:
      for (std::size_t i = 0; i < coefficients.size(); ++i) {
        y += coefficients[i] * std::sin(static_cast<double>(i + 1) * x);
      }
      return y;
    case PerturbationKind::ExpDecaySeries:
      for (std::size_t i = 0; i < coefficients.size(); ++i) {
        y += coefficients[i] * std::exp(-static_cast<double>(i + 1) * x);
      }
      return y;
  }
  return y;
}

namespace {

double derivative_bound(const SmoothPerturbation& pert, double a, double b, int order) {
  double s = 0.0;
  const auto& c = pert.coefficients;
  switch (pert.kind) {
    case PerturbationKind::Polynomial: {
      const double r = std::max(std::fabs(a), std::fabs(b));
      for (std::size_t i = static_cast<std::size_t>(order); i < c.size(); ++i) {
        double f = 1.0;
        for (int q = 0; q < order; ++q) f *= static_cast<double>(i - static_cast<std::size_t>(q));
        s += f * std::fabs(c[i]) * std::pow(r, static_cast<double>(i) - order);
      }
      return s;
    }
    case PerturbationKind::TrigSeries:
      for (std::size_t i = 0; i < c.size(); ++i) s += std::pow(static_cast<double>(i + 1), order) * std::fabs(c[i]);
      return s;
    case PerturbationKind::ExpDecaySeries:
      for (std::size_t i = 0; i < c.size(); ++i) {
        const double rate = static_cast<double>(i + 1);
        s += std::pow(rate, order) * std::fabs(c[i]) * std::exp(-rate * a);
      }
      return s;
  }
  return s;
}

}  // namespace

double SmoothPerturbation::first_derivative_bound(double a, double b) const {
  return derivative_bound(*this, a, b, 1);
}

double SmoothPerturbation::second_derivative_bound(double a, double b) const {
  return derivative_bound(*this, a, b, 2);
}

PathSample smooth_path(const SmoothPerturbation& pert, const UniformGrid& grid) {
  for (double c : pert.coefficients) {
    if (!std::isfinite(c)) throw std::invalid_argument("perturbation coefficients must be finite");
  }
  std::vector<double> v(grid.m() + 1);
  for (std::size_t j = 0; j <= grid.m(); ++j) v[j] = pert(grid.point(j));
  return PathSample(grid, std::move(v));
}

PathSample wholeline_solution_time_section(const HeatModel& model, const SmoothPerturbation& pert,
                                           const FbmGenerator& fbm, std::uint64_t seed) {
  model.validate();
  if (!(fbm.grid().a() > 0.0)) throw std::invalid_argument("time sections need c > 0");
  if (fbm.hurst() != 0.25) throw std::invalid_argument("time sections use H = 1/4");
  PathSample b = fbm.sample(seed);
  const double scale = model.sigma / std::pow(model.theta * kPi, 0.25);
  auto& v = b.mutable_values();
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = scale * v[j] + pert(fbm.grid().point(j));
  return PathSample(fbm.grid(), std::move(v));
}

PathSample wholeline_solution_time_section(const HeatModel& model, const SmoothPerturbation& pert,
                                           const UniformGrid& grid, std::uint64_t seed) {
  if (!(grid.a() > 0.0)) throw std::invalid_argument("time sections need c > 0");
  return wholeline_solution_time_section(model, pert, FbmGenerator(0.25, grid), seed);
}

PathSample wholeline_solution_space_section(const HeatModel& model, const SmoothPerturbation& pert,
                                            const UniformGrid& grid, std::uint64_t seed) {
  model.validate();
  PathSample b = brownian_path(grid, model.sigma / std::sqrt(2.0 * model.theta), seed);
  auto& v = b.mutable_values();
  for (std::size_t j = 0; j < v.size(); ++j) v[j] += pert(grid.point(j));
  return PathSample(grid, std::move(v));
}

}  // namespace heatvar
