#include "heatvar/spectral.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <boost/math/special_functions/trigamma.hpp>
#include <fftw3.h>

#include "fftw_lock.hpp"

namespace heatvar {

std::mutex& detail::fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

namespace {

using detail::fftw_planner_mutex;

// exp(-y) is below double precision once y exceeds this.
constexpr double kNegligibleExponent = 745.0;

std::uint64_t hash_double(std::uint64_t h, double v) {
  return splitmix64_mix(h ^ std::bit_cast<std::uint64_t>(v));
}

void require_bounded(const HeatModel& model) {
  model.validate();
  if (model.domain != Domain::BoundedZeroPi) {
    throw std::invalid_argument("spectral simulation needs the bounded domain [0, pi]");
  }
}

// Sum_{k<=K} cos(kz) / k^2.
double partial_cos_series(double z, std::size_t K) {
  CompensatedSum s;
  for (std::size_t k = K; k >= 1; --k) {
    const double kk = static_cast<double>(k);
    s.add(std::cos(kk * z) / (kk * kk));
  }
  return s.value();
}

// Sum_{k>=1} cos(kz) / k^2 for z in [0, 2 pi].
double full_cos_series(double z) { return kPi * kPi / 6.0 - kPi * z / 2.0 + z * z / 4.0; }

// Sum_{k>K} exp(-2 theta k^2 t) cos(kz) / k^2.
double transient_cos_series(double z, std::size_t K, double theta, double t) {
  CompensatedSum s;
  for (std::size_t k = K + 1;; ++k) {
    const double kk = static_cast<double>(k);
    const double e = 2.0 * theta * kk * kk * t;
    if (e > kNegligibleExponent) break;
    s.add(std::exp(-e) * std::cos(kk * z) / (kk * kk));
  }
  return s.value();
}

}  // namespace

void HeatModel::validate() const {
  if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("theta must be > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be > 0");
  if (modes < 1) throw std::invalid_argument("modes must be >= 1");
}

HeatModel make_model(double theta, double sigma, Domain domain, std::size_t modes) {
  HeatModel m{theta, sigma, domain, modes};
  m.validate();
  return m;
}

double eigenfunction(std::size_t k, double x) {
  if (k < 1) throw std::domain_error("eigenfunction index starts at 1");
  if (!(x >= 0.0 && x <= kPi)) throw std::domain_error("eigenfunction argument outside [0, pi]");
  return std::sqrt(2.0 / kPi) * std::sin(static_cast<double>(k) * x);
}

double mode_variance(const HeatModel& model, std::size_t k, double t) {
  const double lam = model.theta * static_cast<double>(k) * static_cast<double>(k);
  return -std::expm1(-2.0 * lam * t) * model.sigma * model.sigma / (2.0 * lam);
}

double pointwise_tail_bound(const HeatModel& model, std::size_t modes) {
  return model.sigma * model.sigma / (kPi * model.theta * static_cast<double>(modes));
}

std::size_t white_remainder_modes(double theta, double dt) {
  if (!(theta > 0.0 && dt > 0.0)) throw std::invalid_argument("theta and dt must be positive");
  const double k1 = std::ceil(std::sqrt(28.0 / (theta * dt)));
  return std::max<std::size_t>(1, static_cast<std::size_t>(k1) - 1);
}

// ---------------------------------------------------------------------------
// Mode paths

SpectralState simulate_modes(const HeatModel& model, const UniformGrid& time_grid, std::uint64_t seed) {
  require_bounded(model);
  if (time_grid.a() != 0.0) throw std::invalid_argument("mode simulation starts at t = 0");
  const std::size_t K = model.modes;
  const std::size_t n = time_grid.m();
  const double dt = time_grid.mesh();
  SpectralState state{model, time_grid, seed, std::vector<double>(K * (n + 1), 0.0)};
  const std::size_t blocks = (K + kModeBlock - 1) / kModeBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t hi = std::min(K, (b + 1) * kModeBlock);
    for (std::size_t k = b * kModeBlock + 1; k <= hi; ++k) {
      const double lam = model.theta * static_cast<double>(k) * static_cast<double>(k);
      const double a = std::exp(-lam * dt);
      const double s = model.sigma * std::sqrt(-std::expm1(-2.0 * lam * dt) / (2.0 * lam));
      NormalStream z(seed, k);
      double* row = state.coeffs.data() + (k - 1) * (n + 1);
      double u = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        u = a * u + s * z();
        row[i] = u;
      }
    }
  });
  return state;
}

PathSample evaluate_at_x(const SpectralState& state, double x) {
  if (!(x > 0.0 && x < kPi)) throw std::domain_error("evaluation point must lie in (0, pi)");
  const std::size_t K = state.modes();
  const std::size_t n1 = state.steps() + 1;
  if (state.coeffs.size() != K * n1) throw std::invalid_argument("state has inconsistent size");
  const std::size_t blocks = (K + kModeBlock - 1) / kModeBlock;
  std::vector<std::vector<CompensatedSum>> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    std::vector<CompensatedSum> acc(n1);
    const std::size_t hi = std::min(K, (b + 1) * kModeBlock);
    for (std::size_t k = b * kModeBlock + 1; k <= hi; ++k) {
      const double h = eigenfunction(k, x);
      const auto path = state.mode_path(k);
      for (std::size_t i = 0; i < n1; ++i) acc[i].add(h * path[i]);
    }
    partial[b] = std::move(acc);
  });
  std::vector<CompensatedSum> total(n1);
  for (const auto& p : partial) {
    for (std::size_t i = 0; i < n1; ++i) total[i].add(p[i]);
  }
  std::vector<double> values(n1);
  for (std::size_t i = 0; i < n1; ++i) values[i] = total[i].value();
  return PathSample(state.time_grid, std::move(values));
}

void write_state_csv(std::ostream& out, const SpectralState& state) {
  out << std::setprecision(17);
  out << "# theta=" << state.model.theta << '\n'
      << "# sigma=" << state.model.sigma << '\n'
      << "# K=" << state.modes() << '\n'
      << "# n=" << state.steps() << '\n'
      << "# T=" << state.time_grid.b() << '\n'
      << "# seed=" << state.seed << '\n'
      << "k,i,u\n";
  for (std::size_t k = 1; k <= state.modes(); ++k) {
    const auto path = state.mode_path(k);
    for (std::size_t i = 0; i < path.size(); ++i) out << k << ',' << i << ',' << path[i] << '\n';
  }
}

SpectralState read_state_csv(std::istream& in) {
  std::map<std::string, std::string> header;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] != '#') break;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("malformed state header: " + line);
    std::string key = line.substr(1, eq - 1);
    key.erase(0, key.find_first_not_of(' '));
    header[key] = line.substr(eq + 1);
  }
  if (line != "k,i,u") throw std::invalid_argument("state file lacks the k,i,u column header");
  auto get = [&](const char* key) -> const std::string& {
    auto it = header.find(key);
    if (it == header.end()) throw std::invalid_argument(std::string("state header missing ") + key);
    return it->second;
  };
  HeatModel model = make_model(std::stod(get("theta")), std::stod(get("sigma")), Domain::BoundedZeroPi,
                               std::stoull(get("K")));
  const std::size_t n = std::stoull(get("n"));
  SpectralState state{model, UniformGrid(0.0, std::stod(get("T")), n), std::stoull(get("seed")),
                      std::vector<double>(model.modes * (n + 1), 0.0)};
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw std::invalid_argument("malformed state row: " + line);
    }
    std::size_t k = 0, i = 0;
    double u = 0.0;
    const char* s = line.data();
    const auto r1 = std::from_chars(s, s + c1, k);
    const auto r2 = std::from_chars(s + c1 + 1, s + c2, i);
    const auto r3 = std::from_chars(s + c2 + 1, s + line.size(), u);
    if (r1.ec != std::errc() || r2.ec != std::errc() || r3.ec != std::errc() || k < 1 || k > model.modes ||
        i > n) {
      throw std::invalid_argument("malformed state row: " + line);
    }
    state.coeffs[(k - 1) * (n + 1) + i] = u;
    ++rows;
  }
  if (rows != state.coeffs.size()) throw std::invalid_argument("state file is incomplete");
  return state;
}

// ---------------------------------------------------------------------------
// Space sections

struct SpaceSectionPlan::Impl {
  fftw_plan dst = nullptr;
  // General grids: remainder = P^T L sqrt(D) z.
  Eigen::MatrixXd lower;
  Eigen::VectorXd sqrt_d;
  Eigen::PermutationMatrix<Eigen::Dynamic> perm;

  ~Impl() {
    if (dst) {
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      fftw_destroy_plan(dst);
    }
  }
};

SpaceSectionPlan::~SpaceSectionPlan() = default;

SpaceSectionPlan::SpaceSectionPlan(const HeatModel& model, double t, const UniformGrid& grid, TailMode tail)
    : model_(model), t_(t), grid_(grid), tail_(tail), impl_(std::make_unique<Impl>()) {
  require_bounded(model);
  if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("fixed time must be positive");
  if (grid.a() < 0.0 || grid.b() > kPi) throw std::domain_error("space grid must lie inside [0, pi]");
  aliased_ = grid.a() == 0.0 && grid.b() == kPi;

  std::uint64_t h = splitmix64_mix(grid.m());
  h = hash_double(h, grid.a());
  h = hash_double(h, grid.b());
  tag_ = hash_double(h, t);

  const std::size_t K = model.modes;
  const double theta = model.theta;
  const double c2 = model.sigma * model.sigma / (2.0 * theta);
  const double kmax_transient = std::sqrt(kNegligibleExponent / (2.0 * theta * t));
  stationary_ = static_cast<double>(K + 1) > kmax_transient;
  const std::size_t m = grid.m();

  if (aliased_) {
    remainder_var_.assign(m + 1, 0.0);
    if (m >= 2) {
      std::vector<double> in(m - 1), out(m - 1);
      std::lock_guard<std::mutex> lock(fftw_planner_mutex());
      impl_->dst = fftw_plan_r2r_1d(static_cast<int>(m - 1), in.data(), out.data(), FFTW_RODFT00,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    if (tail == TailMode::Exact && m >= 2) {
      const std::size_t period = 2 * m;
      const double md = static_cast<double>(m);
      std::vector<double> transient(m + 1, 0.0);
      for (std::size_t k = K + 1; static_cast<double>(k) <= kmax_transient; ++k) {
        const std::size_t r = k % period;
        if (r == 0 || r == m) continue;
        const double kk = static_cast<double>(k);
        transient[r < m ? r : period - r] += std::exp(-2.0 * theta * kk * kk * t) / (kk * kk);
      }
      for (std::size_t r = 1; r < m; ++r) {
        const double rr = static_cast<double>(r) / (2.0 * md);
        const double q0 = K >= r ? std::floor(static_cast<double>(K - r) / (2.0 * md)) + 1.0 : 0.0;
        const double q1 = std::floor(static_cast<double>(K + r) / (2.0 * md)) + 1.0;
        const double s = (boost::math::trigamma(q0 + rr) + boost::math::trigamma(q1 - rr)) / (4.0 * md * md);
        remainder_var_[r] = std::max(0.0, c2 * (s - transient[r]));
      }
    }
    return;
  }

  if (tail != TailMode::Exact) return;

  // Tail covariance (sigma^2/(2 theta)) sum_{k>K} (1 - e^{-2 theta k^2 t}) (2/pi) sin(kx) sin(ky) / k^2
  // written with cos(k(x-y)) - cos(k(x+y)); both arguments take O(m) distinct values.
  const double hx = grid.mesh();
  std::vector<double> diff_tail(m + 1), sum_tail(2 * m + 1);
  parallel_for(m + 1, [&](std::size_t d) {
    const double z = static_cast<double>(d) * hx;
    diff_tail[d] = full_cos_series(z) - partial_cos_series(z, K) - transient_cos_series(z, K, theta, t);
  });
  parallel_for(2 * m + 1, [&](std::size_t s) {
    const double z = std::min(2.0 * kPi, 2.0 * grid.a() + static_cast<double>(s) * hx);
    sum_tail[s] = full_cos_series(z) - partial_cos_series(z, K) - transient_cos_series(z, K, theta, t);
  });
  Eigen::MatrixXd cov(m + 1, m + 1);
  for (std::size_t i = 0; i <= m; ++i) {
    for (std::size_t j = 0; j <= m; ++j) {
      const std::size_t d = i > j ? i - j : j - i;
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          c2 / kPi * (diff_tail[d] - sum_tail[i + j]);
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("remainder covariance factorization failed");
  impl_->lower = ldlt.matrixL();
  impl_->sqrt_d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
  impl_->perm = Eigen::PermutationMatrix<Eigen::Dynamic>(ldlt.transpositionsP());
}

PathSample SpaceSectionPlan::evaluate(std::span<const double> coeffs, std::uint64_t seed) const {
  const std::size_t K = model_.modes;
  if (coeffs.size() != K) throw std::invalid_argument("coefficient count must equal the number of modes");
  const std::size_t m = grid_.m();
  std::vector<double> values(m + 1, 0.0);
  NormalStream z(seed, kRemainderStream ^ tag_);

  if (aliased_) {
    if (m < 2) return PathSample(grid_, std::move(values));
    const std::size_t period = 2 * m;
    std::vector<double> folded(m - 1, 0.0);
    for (std::size_t k = 1; k <= K; ++k) {
      const std::size_t r = k % period;
      if (r == 0 || r == m) continue;
      if (r < m) {
        folded[r - 1] += coeffs[k - 1];
      } else {
        folded[period - r - 1] -= coeffs[k - 1];
      }
    }
    if (tail_ == TailMode::Exact) {
      for (std::size_t r = 1; r < m; ++r) folded[r - 1] += std::sqrt(remainder_var_[r]) * z();
    }
    std::vector<double> out(m - 1);
    fftw_execute_r2r(impl_->dst, folded.data(), out.data());
    const double scale = std::sqrt(2.0 / kPi) / 2.0;
    for (std::size_t j = 1; j < m; ++j) values[j] = scale * out[j - 1];
    return PathSample(grid_, std::move(values));
  }

  // sin(kx) by the Chebyshev recurrence sin((k+1)x) = 2 cos(x) sin(kx) - sin((k-1)x).
  parallel_for(m + 1, [&](std::size_t j) {
    const double x = grid_.point(j);
    const double two_cos = 2.0 * std::cos(x);
    double prev = 0.0;
    double cur = std::sin(x);
    CompensatedSum s;
    for (std::size_t k = 0; k < K; ++k) {
      s.add(coeffs[k] * cur);
      const double next = two_cos * cur - prev;
      prev = cur;
      cur = next;
    }
    values[j] = std::sqrt(2.0 / kPi) * s.value();
  });
  if (tail_ == TailMode::Exact) {
    Eigen::VectorXd g(static_cast<Eigen::Index>(m + 1));
    for (Eigen::Index j = 0; j < g.size(); ++j) g(j) = z();
    const Eigen::VectorXd rem = impl_->perm.transpose() * (impl_->lower * impl_->sqrt_d.cwiseProduct(g));
    for (std::size_t j = 0; j <= m; ++j) values[j] += rem(static_cast<Eigen::Index>(j));
  }
  return PathSample(grid_, std::move(values));
}

ModeField::ModeField(const HeatModel& model, std::uint64_t seed)
    : model_(model), seed_(seed), u_(model.modes, 0.0) {
  require_bounded(model);
  streams_.reserve(model.modes);
  for (std::size_t k = 1; k <= model.modes; ++k) streams_.emplace_back(seed, k);
}

void ModeField::draw_marginal(double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("time must be nonnegative");
  const std::size_t K = model_.modes;
  const std::size_t blocks = (K + kModeBlock - 1) / kModeBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t hi = std::min(K, (b + 1) * kModeBlock);
    for (std::size_t k = b * kModeBlock + 1; k <= hi; ++k) {
      u_[k - 1] = std::sqrt(mode_variance(model_, k, t)) * streams_[k - 1]();
    }
  });
  t_ = t;
  ++draws_;
}

void ModeField::advance(double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  const std::size_t K = model_.modes;
  const std::size_t blocks = (K + kModeBlock - 1) / kModeBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t hi = std::min(K, (b + 1) * kModeBlock);
    for (std::size_t k = b * kModeBlock + 1; k <= hi; ++k) {
      const double lam = model_.theta * static_cast<double>(k) * static_cast<double>(k);
      const double a = std::exp(-lam * dt);
      const double s = model_.sigma * std::sqrt(-std::expm1(-2.0 * lam * dt) / (2.0 * lam));
      u_[k - 1] = a * u_[k - 1] + s * streams_[k - 1]();
    }
  });
  t_ += dt;
  ++draws_;
}

PathSample ModeField::space_section(const SpaceSectionPlan& plan) const {
  const bool same_time = std::fabs(plan.time() - t_) <= 1e-12 * std::max(1.0, t_);
  if (!same_time && !(plan.stationary_tail() && t_ >= plan.time())) {
    throw std::invalid_argument("space section plan was built for a different time");
  }
  return plan.evaluate(u_, substream(seed_, kAuxStream + draws_));
}

std::vector<double> draw_mode_marginals(const HeatModel& model, double t, std::uint64_t seed) {
  std::vector<double> u(model.modes);
  for (std::size_t k = 1; k <= model.modes; ++k) {
    NormalStream z(seed, k);
    u[k - 1] = std::sqrt(mode_variance(model, k, t)) * z();
  }
  return u;
}

PathSample sample_fixed_time(const HeatModel& model, double t, const UniformGrid& space_grid, std::uint64_t seed,
                             TailMode tail) {
  SpaceSectionPlan plan(model, t, space_grid, tail);
  return plan.evaluate(draw_mode_marginals(model, t, seed), seed);
}

// ---------------------------------------------------------------------------
// Time sections

// sigma^2/(pi theta) [x(pi-x)/2 - sum_{k<=K} sin^2(kx)/k^2 - sum_{k>K} sin^2(kx) e^{-2 theta k^2 t}/k^2]
double time_section_remainder_variance(const HeatModel& model, double x, std::size_t K, double t) {
  if (!(x > 0.0 && x < kPi)) throw std::domain_error("time sections need 0 < x < pi");
  if (t <= 0.0) return 0.0;
  CompensatedSum retained;
  for (std::size_t k = K; k >= 1; --k) {
    const double kk = static_cast<double>(k);
    const double s = std::sin(kk * x);
    retained.add(s * s / (kk * kk));
  }
  CompensatedSum transient;
  for (std::size_t k = K + 1;; ++k) {
    const double kk = static_cast<double>(k);
    const double e = 2.0 * model.theta * kk * kk * t;
    if (e > kNegligibleExponent) break;
    const double s = std::sin(kk * x);
    transient.add(s * s * std::exp(-e) / (kk * kk));
  }
  const double pref = model.sigma * model.sigma / (kPi * model.theta);
  return std::max(0.0, pref * (x * (kPi - x) / 2.0 - retained.value() - transient.value()));
}

TimeSectionSampler::TimeSectionSampler(const HeatModel& model, double x, const UniformGrid& time_grid,
                                       TailMode tail)
    : model_(model), x_(x), grid_(time_grid), tail_(tail) {
  require_bounded(model);
  if (!(x > 0.0 && x < kPi)) throw std::domain_error("time sections need 0 < x < pi");
  if (time_grid.a() < 0.0) throw std::invalid_argument("time grid must start at t >= 0");
  const double dt = time_grid.mesh();
  const double theta = model.theta;
  effective_modes_ = tail == TailMode::Exact ? white_remainder_modes(theta, dt) : model.modes;

  const double c = time_grid.a();
  for (std::size_t k = 1; k <= effective_modes_; ++k) {
    const double w = eigenfunction(k, x);
    if (std::fabs(w) <= 1e-12) continue;
    const double lam = theta * static_cast<double>(k) * static_cast<double>(k);
    modes_.push_back(OuMode{k, w, c > 0.0 ? std::sqrt(mode_variance(model, k, c)) : 0.0, std::exp(-lam * dt),
                            model.sigma * std::sqrt(-std::expm1(-2.0 * lam * dt) / (2.0 * lam))});
  }

  if (tail != TailMode::Exact) return;
  remainder_var_.resize(time_grid.m() + 1);
  for (std::size_t i = 0; i <= time_grid.m(); ++i) {
    remainder_var_[i] = time_section_remainder_variance(model, x, effective_modes_, time_grid.point(i));
  }
}

PathSample TimeSectionSampler::finish(std::vector<double> values, std::uint64_t seed) const {
  if (!remainder_var_.empty()) {
    NormalStream z(seed, kRemainderStream);
    for (std::size_t i = 0; i < values.size(); ++i) values[i] += std::sqrt(remainder_var_[i]) * z();
  }
  return PathSample(grid_, std::move(values));
}

PathSample TimeSectionSampler::sample(std::uint64_t seed) const {
  std::vector<double> values(grid_.m() + 1);
  accumulate_ou_modes(modes_, grid_.m(), seed, values);
  return finish(std::move(values), seed);
}

PathSample TimeSectionSampler::sample_reference(std::uint64_t seed) const {
  std::vector<double> values(grid_.m() + 1);
  reference::accumulate_ou_modes(modes_, grid_.m(), seed, values);
  return finish(std::move(values), seed);
}

}  // namespace heatvar
