#include "heatvar/mc.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <stdexcept>

#include "heatvar/asymptotics.hpp"
#include "heatvar/estimators.hpp"
#include "heatvar/gaussian_refs.hpp"
#include "heatvar/kernels.hpp"
#include "heatvar/rng.hpp"

namespace heatvar {

ExperimentScheme parse_experiment_scheme(const std::string& name) {
  if (name == "fixed-space") return ExperimentScheme::FixedSpace;
  if (name == "fixed-time") return ExperimentScheme::FixedTime;
  if (name == "joint") return ExperimentScheme::Joint;
  if (name == "averaged") return ExperimentScheme::Averaged;
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string to_string(ExperimentScheme s) {
  switch (s) {
    case ExperimentScheme::FixedSpace:
      return "fixed-space";
    case ExperimentScheme::FixedTime:
      return "fixed-time";
    case ExperimentScheme::Joint:
      return "joint";
    case ExperimentScheme::Averaged:
      return "averaged";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  model.validate();
  if (replications < 1) throw std::invalid_argument("replications must be >= 1");
  if (grid_sizes.empty()) throw std::invalid_argument("grid_sizes must not be empty");
  for (std::size_t g : grid_sizes) {
    if (g < 1) throw std::invalid_argument("grid sizes must be >= 1");
  }
  if (!std::is_sorted(grid_sizes.begin(), grid_sizes.end())) {
    throw std::invalid_argument("grid_sizes must be increasing");
  }
  const bool bounded = model.domain == Domain::BoundedZeroPi;
  const bool uses_time = scheme == ExperimentScheme::FixedSpace || scheme == ExperimentScheme::Joint;
  const bool uses_space = scheme != ExperimentScheme::FixedSpace;
  if (uses_time) {
    if (!(c > 0.0 && c < d)) throw std::invalid_argument("time interval needs 0 < c < d");
    if (bounded && !(x > 0.0 && x < kPi)) throw std::invalid_argument("x must lie in (0, pi)");
  }
  if (uses_space) {
    if (!(a < b)) throw std::invalid_argument("space interval needs a < b");
    if (bounded && (a < 0.0 || b > kPi)) throw std::invalid_argument("space interval must lie in [0, pi]");
    if (!(t > 0.0)) throw std::invalid_argument("t must be positive");
  }
  if (scheme == ExperimentScheme::Joint && n < 1) throw std::invalid_argument("n must be >= 1");
  if (scheme == ExperimentScheme::Averaged) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    if (!bounded) throw std::invalid_argument("averaged scheme needs the bounded domain");
  }
}

double ExperimentConfig::true_value() const {
  return parameter == Parameter::Theta ? model.theta : model.sigma * model.sigma;
}

ExperimentConfig experiment_from_config(const Config& config) {
  config.require_known({"theta", "sigma", "modes", "domain", "scheme", "parameter", "grid_sizes", "a", "b", "c",
                        "d", "x", "t", "n", "replications", "seed", "output_dir", "tail"});
  ExperimentConfig e;
  e.model.theta = config.get_double("theta", e.model.theta);
  e.model.sigma = config.get_double("sigma", e.model.sigma);
  e.model.modes = config.get_uint("modes", e.model.modes);
  const std::string domain = config.get_string("domain", "bounded");
  if (domain == "bounded") {
    e.model.domain = Domain::BoundedZeroPi;
  } else if (domain == "wholeline") {
    e.model.domain = Domain::WholeLine;
  } else {
    throw ConfigError("domain must be bounded or wholeline");
  }
  e.scheme = parse_experiment_scheme(config.get_string("scheme", "fixed-time"));
  const std::string parameter = config.get_string("parameter", "theta");
  if (parameter == "theta") {
    e.parameter = Parameter::Theta;
  } else if (parameter == "sigma2") {
    e.parameter = Parameter::Sigma2;
  } else {
    throw ConfigError("parameter must be theta or sigma2");
  }
  const std::string tail = config.get_string("tail", "exact");
  if (tail == "exact") {
    e.tail = TailMode::Exact;
  } else if (tail == "truncate") {
    e.tail = TailMode::Truncate;
  } else {
    throw ConfigError("tail must be exact or truncate");
  }
  e.grid_sizes = config.get_size_list("grid_sizes", e.grid_sizes);
  e.a = config.get_double("a", e.a);
  e.b = config.get_double("b", e.b);
  e.c = config.get_double("c", e.c);
  e.d = config.get_double("d", e.d);
  e.x = config.get_double("x", e.x);
  e.t = config.get_double("t", e.t);
  e.n = config.get_uint("n", e.n);
  e.replications = config.get_uint("replications", e.replications);
  e.base_seed = config.get_uint("seed", e.base_seed);
  e.output_dir = config.get_string("output_dir", "");
  e.validate();
  return e;
}

McRow summarize(std::size_t grid_size, const std::vector<double>& values, double true_value) {
  if (values.empty()) throw std::invalid_argument("no replications to summarize");
  McRow row;
  row.grid_size = grid_size;
  row.replications = values.size();
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  row.sample_mean = sum.value() / static_cast<double>(values.size());
  if (values.size() > 1) {
    CompensatedSum sq;
    for (double v : values) sq.add((v - row.sample_mean) * (v - row.sample_mean));
    row.sample_std = std::sqrt(sq.value() / static_cast<double>(values.size() - 1));
  }
  row.bias = row.sample_mean - true_value;
  return row;
}

namespace {

struct Estimator {
  Parameter parameter;
  double theta, sigma;

  double space(const PathSample& s) const {
    return parameter == Parameter::Theta ? theta_tilde_fixed_time(s, sigma).estimate
                                         : sigma2_tilde_fixed_time(s, theta).estimate;
  }
  double time(const PathSample& s) const {
    return parameter == Parameter::Theta ? theta_hat_fixed_space(s, sigma).estimate
                                         : sigma2_hat_fixed_space(s, theta).estimate;
  }
  double joint(const PathSample& ts, const PathSample& ss) const {
    const auto j = joint_estimate(ts, ss);
    return parameter == Parameter::Theta ? j.theta.estimate : j.sigma2.estimate;
  }
};

std::optional<double> theory_std(const ExperimentConfig& cfg, std::size_t size) {
  const double value = cfg.true_value();
  const bool theta = cfg.parameter == Parameter::Theta;
  switch (cfg.scheme) {
    case ExperimentScheme::FixedTime:
      return value * std::sqrt(2.0 / static_cast<double>(size));
    case ExperimentScheme::FixedSpace: {
      // Both domains share the limit constant: sigma_bar2^2 + sigma_bar4^2 = c_check^2.
      static const double c2 = c_check_constants().c_check_sq;
      CltInputs in{cfg.model.theta, value, size, c2, c2};
      if (cfg.model.domain == Domain::WholeLine) {
        return theoretical_std(theta ? CltScheme::WholeLineTheta : CltScheme::WholeLineSigma2, in);
      }
      return theoretical_std(theta ? CltScheme::BoundedTheta : CltScheme::BoundedSigma2, in);
    }
    default:
      return std::nullopt;
  }
}

const SmoothPerturbation& zero_perturbation() {
  static const SmoothPerturbation zero{};
  return zero;
}

}  // namespace

McSummary run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const HeatModel& model = cfg.model;
  const bool bounded = model.domain == Domain::BoundedZeroPi;
  const Estimator est{cfg.parameter, model.theta, model.sigma};
  const std::size_t G = cfg.grid_sizes.size();
  const std::size_t R = cfg.replications;

  // Per-grid samplers, built once and shared read-only by all replications.
  std::vector<std::unique_ptr<SpaceSectionPlan>> plans;
  std::vector<std::unique_ptr<TimeSectionSampler>> time_samplers;
  std::vector<FbmGenerator> fbms;
  std::unique_ptr<TimeSectionSampler> joint_time;
  std::unique_ptr<FbmGenerator> joint_fbm;

  const double plan_time = cfg.scheme == ExperimentScheme::Averaged ? cfg.t / static_cast<double>(cfg.n) : cfg.t;
  if (cfg.scheme != ExperimentScheme::FixedSpace && bounded) {
    for (std::size_t m : cfg.grid_sizes) {
      plans.push_back(std::make_unique<SpaceSectionPlan>(model, plan_time, uniform_grid(cfg.a, cfg.b, m), cfg.tail));
    }
  }
  if (cfg.scheme == ExperimentScheme::FixedSpace) {
    for (std::size_t n : cfg.grid_sizes) {
      const auto grid = uniform_grid(cfg.c, cfg.d, n);
      if (bounded) {
        time_samplers.push_back(std::make_unique<TimeSectionSampler>(model, cfg.x, grid, cfg.tail));
      } else {
        fbms.emplace_back(0.25, grid);
      }
    }
  }
  if (cfg.scheme == ExperimentScheme::Joint) {
    const auto grid = uniform_grid(cfg.c, cfg.d, cfg.n);
    if (bounded) {
      joint_time = std::make_unique<TimeSectionSampler>(model, cfg.x, grid, cfg.tail);
    } else {
      joint_fbm = std::make_unique<FbmGenerator>(0.25, grid);
    }
  }
  // Averaged: the time-t_1 plans must stay valid at every later section time.
  bool rebuild_averaged = false;
  if (cfg.scheme == ExperimentScheme::Averaged) {
    for (const auto& p : plans) rebuild_averaged = rebuild_averaged || !p->stationary_tail();
  }

  McSummary summary;
  summary.true_value = cfg.true_value();
  summary.estimates.assign(G, std::vector<double>(R));

  parallel_for(R, [&](std::size_t r) {
    const std::uint64_t seed = substream(cfg.base_seed, r);
    try {
      switch (cfg.scheme) {
        case ExperimentScheme::FixedTime: {
          if (bounded) {
            const auto coeffs = draw_mode_marginals(model, cfg.t, seed);
            for (std::size_t g = 0; g < G; ++g) summary.estimates[g][r] = est.space(plans[g]->evaluate(coeffs, seed));
          } else {
            for (std::size_t g = 0; g < G; ++g) {
              const auto grid = uniform_grid(cfg.a, cfg.b, cfg.grid_sizes[g]);
              summary.estimates[g][r] =
                  est.space(wholeline_solution_space_section(model, zero_perturbation(), grid, seed));
            }
          }
          break;
        }
        case ExperimentScheme::FixedSpace: {
          for (std::size_t g = 0; g < G; ++g) {
            summary.estimates[g][r] =
                bounded ? est.time(time_samplers[g]->sample(seed))
                        : est.time(wholeline_solution_time_section(model, zero_perturbation(), fbms[g], seed));
          }
          break;
        }
        case ExperimentScheme::Joint: {
          // The two sections are drawn independently; each has its exact marginal law.
          const std::uint64_t ts_seed = substream(seed, 1), ss_seed = substream(seed, 2);
          const PathSample ts = bounded ? joint_time->sample(ts_seed)
                                        : wholeline_solution_time_section(model, zero_perturbation(), *joint_fbm,
                                                                          ts_seed);
          std::vector<double> coeffs;
          if (bounded) coeffs = draw_mode_marginals(model, cfg.t, ss_seed);
          for (std::size_t g = 0; g < G; ++g) {
            const PathSample ss =
                bounded ? plans[g]->evaluate(coeffs, ss_seed)
                        : wholeline_solution_space_section(model, zero_perturbation(),
                                                           uniform_grid(cfg.a, cfg.b, cfg.grid_sizes[g]), ss_seed);
            summary.estimates[g][r] = est.joint(ts, ss);
          }
          break;
        }
        case ExperimentScheme::Averaged: {
          ModeField field(model, seed);
          const double dt = cfg.t / static_cast<double>(cfg.n);
          std::vector<CompensatedSum> sums(G);
          for (std::size_t i = 1; i <= cfg.n; ++i) {
            field.advance(dt);
            for (std::size_t g = 0; g < G; ++g) {
              if (rebuild_averaged && i > 1) {
                const SpaceSectionPlan plan(model, field.time(), plans[g]->grid(), cfg.tail);
                sums[g].add(est.space(field.space_section(plan)));
              } else {
                sums[g].add(est.space(field.space_section(*plans[g])));
              }
            }
          }
          for (std::size_t g = 0; g < G; ++g) summary.estimates[g][r] = sums[g].value() / static_cast<double>(cfg.n);
          break;
        }
      }
    } catch (const std::exception& e) {
      throw std::runtime_error("replication " + std::to_string(r) + ": " + e.what());
    }
  });

  for (std::size_t g = 0; g < G; ++g) {
    McRow row = summarize(cfg.grid_sizes[g], summary.estimates[g], summary.true_value);
    row.theoretical_std = theory_std(cfg, cfg.grid_sizes[g]);
    summary.rows.push_back(row);
  }
  if (!cfg.output_dir.empty()) write_experiment_files(cfg.output_dir, summary);
  return summary;
}

void write_summary_csv(std::ostream& out, const McSummary& summary) {
  const auto old = out.precision(17);
  out << "grid_size,sample_mean,sample_std,theoretical_std,bias,replications\n";
  for (const auto& row : summary.rows) {
    out << row.grid_size << ',' << row.sample_mean << ',';
    if (row.sample_std) out << *row.sample_std;
    out << ',';
    if (row.theoretical_std) out << *row.theoretical_std;
    out << ',' << row.bias << ',' << row.replications << '\n';
  }
  out.precision(old);
}

void write_replications_csv(std::ostream& out, const McSummary& summary) {
  const auto old = out.precision(17);
  out << "grid_size,replication,estimate\n";
  for (std::size_t g = 0; g < summary.rows.size(); ++g) {
    for (std::size_t r = 0; r < summary.estimates[g].size(); ++r) {
      out << summary.rows[g].grid_size << ',' << r << ',' << summary.estimates[g][r] << '\n';
    }
  }
  out.precision(old);
}

void write_experiment_files(const std::string& dir, const McSummary& summary) {
  std::filesystem::create_directories(dir);
  const auto base = std::filesystem::path(dir);
  std::ofstream s(base / "summary.csv");
  std::ofstream r(base / "replications.csv");
  if (!s || !r) throw std::runtime_error("cannot write experiment files in " + dir);
  write_summary_csv(s, summary);
  write_replications_csv(r, summary);
}

}  // namespace heatvar
