#pragma once

// Monte Carlo experiment runner. Replication r uses seed substream(base_seed, r)
// and results are aggregated in replication order, so the output does not
// depend on the number of threads.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "heatvar/config.hpp"
#include "heatvar/spectral.hpp"

namespace heatvar {

enum class ExperimentScheme { FixedSpace, FixedTime, Joint, Averaged };
enum class Parameter { Theta, Sigma2 };

ExperimentScheme parse_experiment_scheme(const std::string& name);
std::string to_string(ExperimentScheme s);

struct ExperimentConfig {
  HeatModel model;
  TailMode tail = TailMode::Exact;
  ExperimentScheme scheme = ExperimentScheme::FixedTime;
  Parameter parameter = Parameter::Theta;
  // Swept sizes: n for fixed-space, m otherwise.
  std::vector<std::size_t> grid_sizes{100, 500, 1000};
  double a = 0.0, b = kPi;  // space interval
  double c = 0.25, d = 1.0;  // time interval
  double x = kPi / 2;        // fixed space point
  double t = 1.0;            // fixed time
  // Joint: steps of the time section on [c, d]. Averaged: number of time
  // sections t_i = i t / n, i = 1..n.
  std::size_t n = 1000;
  std::size_t replications = 1000;
  std::uint64_t base_seed = 42;
  std::string output_dir;  // empty: no files written

  /// Throws std::invalid_argument on inconsistent settings.
  void validate() const;
  double true_value() const;
};

/// Keys: theta, sigma, modes, domain (bounded|wholeline), scheme, parameter
/// (theta|sigma2), grid_sizes, a, b, c, d, x, t, n, replications, seed,
/// output_dir, tail (exact|truncate). Unknown keys are an error.
ExperimentConfig experiment_from_config(const Config& config);

struct McRow {
  std::size_t grid_size = 0;
  double sample_mean = 0.0;
  std::optional<double> sample_std;  // absent for a single replication
  std::optional<double> theoretical_std;
  double bias = 0.0;
  std::size_t replications = 0;
};

struct McSummary {
  double true_value = 0.0;
  std::vector<McRow> rows;                     // ordered by grid size
  std::vector<std::vector<double>> estimates;  // [row][replication]
};

McSummary run_experiment(const ExperimentConfig& config);

/// Mean and unbiased std in index order (std absent when values.size() < 2).
McRow summarize(std::size_t grid_size, const std::vector<double>& values, double true_value);

void write_summary_csv(std::ostream& out, const McSummary& summary);
void write_replications_csv(std::ostream& out, const McSummary& summary);
/// Writes summary.csv and replications.csv under dir (created if needed).
void write_experiment_files(const std::string& dir, const McSummary& summary);

}  // namespace heatvar
