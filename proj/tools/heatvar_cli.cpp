// heatvar: simulation, estimation and Monte Carlo front end.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "heatvar/acceptance.hpp"
#include "heatvar/asymptotics.hpp"
#include "heatvar/config.hpp"
#include "heatvar/estimators.hpp"
#include "heatvar/figures.hpp"
#include "heatvar/kernels.hpp"
#include "heatvar/mc.hpp"
#include "heatvar/spectral.hpp"

namespace {

using namespace heatvar;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  int threads = 0;
};

void apply_threads(const Globals& g) {
  int n = g.threads;
  if (const char* env = std::getenv("HEATVAR_THREADS"); env && *env) {
    try {
      n = std::stoi(env);
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string("HEATVAR_THREADS is not an integer: ") + env);
    }
  }
  set_threads(n);
}

// Writes to `path`, or to stdout when path is empty or "-".
template <class F>
void emit(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  write(out);
}

struct SimulateArgs {
  std::string section = "state";
  double theta = 0.1, sigma = 0.2;
  std::size_t modes = 15000;
  std::size_t steps = 1000;
  double horizon = 1.0;
  double x = kPi / 2, t = 1.0;
  double a = 0.0, b = kPi, c = 0.25, d = 1.0;
  bool truncate = false;
};

int run_simulate(const SimulateArgs& s, const Globals& g) {
  const HeatModel model = make_model(s.theta, s.sigma, Domain::BoundedZeroPi, s.modes);
  const std::uint64_t seed = g.seed.value_or(42);
  const TailMode tail = s.truncate ? TailMode::Truncate : TailMode::Exact;
  if (s.section == "state") {
    const auto state = simulate_modes(model, uniform_grid(0.0, s.horizon, s.steps), seed);
    emit(g.out, [&](std::ostream& o) { write_state_csv(o, state); });
  } else if (s.section == "time") {
    const TimeSectionSampler sampler(model, s.x, uniform_grid(s.c, s.d, s.steps), tail);
    const PathSample p = sampler.sample(seed);
    emit(g.out, [&](std::ostream& o) { write_path_csv(o, p, "t"); });
  } else if (s.section == "space") {
    const PathSample p = sample_fixed_time(model, s.t, uniform_grid(s.a, s.b, s.steps), seed, tail);
    emit(g.out, [&](std::ostream& o) { write_path_csv(o, p, "x"); });
  } else {
    throw std::invalid_argument("section must be state, time or space");
  }
  return 0;
}

struct EstimateArgs {
  std::string scheme;
  std::vector<std::string> inputs;
  std::string time_input, space_input;
  std::optional<double> sigma, theta;
};

int run_estimate(const EstimateArgs& e, const Globals& g) {
  std::vector<EstimateReport> reports;
  auto single_input = [&]() {
    if (e.inputs.size() != 1) throw std::invalid_argument("scheme " + e.scheme + " takes exactly one --input");
    return read_path_csv(e.inputs.front());
  };
  if (e.scheme == "fixed-time" || e.scheme == "fixed-space") {
    if (e.sigma.has_value() == e.theta.has_value()) {
      throw std::invalid_argument("give exactly one of --sigma (estimates theta) or --theta (estimates sigma^2)");
    }
    const PathSample p = single_input();
    if (e.scheme == "fixed-time") {
      reports.push_back(e.sigma ? theta_tilde_fixed_time(p, *e.sigma) : sigma2_tilde_fixed_time(p, *e.theta));
    } else {
      const double c2 = c_check_constants().c_check_sq;
      reports.push_back(e.sigma ? theta_hat_fixed_space(p, *e.sigma, c2) : sigma2_hat_fixed_space(p, *e.theta, c2));
    }
  } else if (e.scheme == "joint") {
    if (e.time_input.empty() || e.space_input.empty()) {
      throw std::invalid_argument("joint scheme needs --time-input and --space-input");
    }
    const auto j = joint_estimate(read_path_csv(e.time_input), read_path_csv(e.space_input));
    reports = {j.theta, j.sigma2};
  } else if (e.scheme == "averaged") {
    if (e.inputs.empty()) throw std::invalid_argument("averaged scheme needs at least one --input");
    if (e.sigma.has_value() == e.theta.has_value()) {
      throw std::invalid_argument("give exactly one of --sigma or --theta");
    }
    std::vector<PathSample> sections;
    for (const auto& path : e.inputs) sections.push_back(read_path_csv(path));
    reports.push_back(averaged_estimates(sections, e.sigma ? AveragedKind::ThetaFixedTime : AveragedKind::Sigma2FixedTime,
                                         e.sigma ? *e.sigma : *e.theta));
  } else {
    throw std::invalid_argument("unknown scheme '" + e.scheme + "'");
  }
  emit(g.out, [&](std::ostream& o) {
    write_report_csv_header(o);
    for (const auto& r : reports) write_report_csv_row(o, r);
  });
  return 0;
}

struct AsymptoticsArgs {
  double theta = 0.1;
  double x = kPi / 2;
  double length = 0.75;
  std::size_t n = 1 << 12;
};

int run_asymptotics(const AsymptoticsArgs& a, const Globals& g) {
  std::ostringstream out;
  out.precision(17);
  out << "constant_name,value,error_estimate,truncation_params\n";
  const auto sn = sigma_n_squared(a.theta, a.x, a.length, a.n);
  out << "sigma_n2," << sn.value << ',' << sn.error_bound << ",K=" << sn.terms << '\n';
  const auto kl = keylimit_check(a.theta, a.x, a.n);
  out << "keylimit," << kl.value << ',' << kl.error_bound << ",K=" << kl.terms << '\n';
  std::vector<std::size_t> ns;
  for (std::size_t n = 256; n <= a.n; n *= 4) ns.push_back(n);
  if (ns.size() >= 3) {
    const auto sb = sigma_bar_constants(a.theta, a.x, a.length, ns);
    out << "sigma_bar2_sq," << sb.sigma_bar2_sq.value << ',' << sb.sigma_bar2_sq.error_estimate << ",n_max="
        << ns.back() << '\n';
    out << "sigma_bar4_sq," << sb.sigma_bar4_sq.value << ',' << sb.sigma_bar4_sq.error_estimate << ",n_max="
        << ns.back() << '\n';
  }
  const auto cc = c_check_constants();
  const std::string params = "max_lag=" + std::to_string(cc.max_lag);
  out << "c_check2_sq," << cc.c_check2_sq.value << ',' << cc.c_check2_sq.error_estimate << ',' << params << '\n';
  out << "c_check4_sq," << cc.c_check4_sq.value << ',' << cc.c_check4_sq.error_estimate << ',' << params << '\n';
  out << "c_check_sq," << cc.c_check_sq << ',' << cc.c_check_sq_error << ',' << params << '\n';
  emit(g.out, [&](std::ostream& o) { o << out.str(); });
  return 0;
}

int run_mc(const Globals& g) {
  Config cfg = g.config.empty() ? Config{} : load_config(g.config);
  if (g.seed) cfg.set("seed", std::to_string(*g.seed));
  if (!g.out.empty()) cfg.set("output_dir", g.out);
  const ExperimentConfig e = experiment_from_config(cfg);
  const McSummary summary = run_experiment(e);
  write_summary_csv(std::cout, summary);
  return 0;
}

struct FigureArgs {
  std::vector<int> figures;
  bool fast = false;
  std::optional<std::size_t> replications, modes;
};

int run_figures(const FigureArgs& f, const Globals& g) {
  FigureOptions o = FigureOptions::defaults(f.fast);
  if (g.seed) o.seed = *g.seed;
  if (f.replications) o.replications = *f.replications;
  if (f.modes) o.modes = *f.modes;
  const std::vector<int> ids = f.figures.empty() ? std::vector<int>{1, 2, 3, 4, 5} : f.figures;
  const std::string dir = g.out.empty() ? "." : g.out;
  for (int id : ids) std::cout << reproduce_figure(id, o, dir) << '\n';
  return 0;
}

int run_selftest(const std::vector<int>& criteria) {
  std::vector<int> ids = criteria;
  if (ids.empty()) {
    for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
  }
  int failed = 0;
  for (int id : ids) {
    const auto r = run_criterion(id);
    std::cout << format_result(r) << std::endl;
    if (!r.passed) ++failed;
  }
  std::cout << (ids.size() - static_cast<std::size_t>(failed)) << '/' << ids.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter estimation for the stochastic heat equation from power variations"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config, "key=value configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "base random seed");
  app.add_option("--out", g.out, "output file or directory");
  app.add_option("--threads", g.threads, "OpenMP threads (HEATVAR_THREADS overrides)");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "simulate the spectral solution");
  simulate->add_option("--section", sim.section, "state, time or space")->capture_default_str();
  simulate->add_option("--theta", sim.theta)->capture_default_str();
  simulate->add_option("--sigma", sim.sigma)->capture_default_str();
  simulate->add_option("--modes", sim.modes, "Fourier modes K")->capture_default_str();
  simulate->add_option("--steps", sim.steps, "grid steps")->capture_default_str();
  simulate->add_option("--horizon", sim.horizon, "state: final time T")->capture_default_str();
  simulate->add_option("-x", sim.x, "time section: space point")->capture_default_str();
  simulate->add_option("-t", sim.t, "space section: time")->capture_default_str();
  simulate->add_option("-a", sim.a)->capture_default_str();
  simulate->add_option("-b", sim.b)->capture_default_str();
  simulate->add_option("-c", sim.c)->capture_default_str();
  simulate->add_option("-d", sim.d)->capture_default_str();
  simulate->add_flag("--truncate", sim.truncate, "plain K-mode sum without the remainder");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "estimate theta or sigma^2 from path CSV files");
  estimate->add_option("--scheme", est.scheme, "fixed-time, fixed-space, joint or averaged")->required();
  estimate->add_option("--input", est.inputs, "path CSV (repeat for averaged)");
  estimate->add_option("--time-input", est.time_input, "joint: time section CSV");
  estimate->add_option("--space-input", est.space_input, "joint: space section CSV");
  estimate->add_option("--sigma", est.sigma, "known sigma (estimate theta)");
  estimate->add_option("--theta", est.theta, "known theta (estimate sigma^2)");

  AsymptoticsArgs asy;
  auto* asymptotics = app.add_subcommand("asymptotics", "print asymptotic constants as CSV");
  asymptotics->add_option("--theta", asy.theta)->capture_default_str();
  asymptotics->add_option("-x", asy.x)->capture_default_str();
  asymptotics->add_option("--length", asy.length, "d - c")->capture_default_str();
  asymptotics->add_option("-n", asy.n)->capture_default_str();

  auto* mc = app.add_subcommand("mc", "run a Monte Carlo experiment from --config");

  FigureArgs fig;
  auto* figures = app.add_subcommand("reproduce-figures", "write figure CSV and SVG files");
  figures->add_option("--figure", fig.figures, "figure ids 1..5 (default all)")->check(CLI::Range(1, 5));
  figures->add_flag("--fast", fig.fast, "2000 modes, 100 replications");
  figures->add_option("--replications", fig.replications);
  figures->add_option("--modes", fig.modes);

  std::vector<int> criteria;
  auto* selftest = app.add_subcommand("selftest", "run the acceptance criteria");
  selftest->add_option("--criterion", criteria, "criterion ids (default all)")->check(CLI::Range(1, kCriterionCount));

  CLI11_PARSE(app, argc, argv);

  try {
    apply_threads(g);
    if (*simulate) return run_simulate(sim, g);
    if (*estimate) return run_estimate(est, g);
    if (*asymptotics) return run_asymptotics(asy, g);
    if (*mc) return run_mc(g);
    if (*figures) return run_figures(fig, g);
    if (*selftest) return run_selftest(criteria);
  } catch (const std::exception& e) {
    std::cerr << "heatvar: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
