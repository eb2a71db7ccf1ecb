#include "heatvar/figures.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "heatvar/estimators.hpp"
#include "heatvar/kernels.hpp"
#include "heatvar/rng.hpp"
#include "heatvar/spectral.hpp"
#include "heatvar/svg.hpp"

namespace heatvar {

FigureOptions FigureOptions::defaults(bool fast) {
  FigureOptions o;
  if (fast) {
    o.modes = 2000;
    o.replications = 100;
  }
  return o;
}

std::vector<std::size_t> figure_m_sweep() {
  std::vector<std::size_t> m;
  for (std::size_t v = 50; v <= 2000; v += 50) m.push_back(v);
  return m;
}

namespace {

constexpr double kTimes[] = {0.4, 1.0};

using Plans = std::vector<std::unique_ptr<SpaceSectionPlan>>;

Plans make_plans(const HeatModel& model, double t) {
  Plans plans;
  for (std::size_t m : figure_m_sweep()) {
    plans.push_back(std::make_unique<SpaceSectionPlan>(model, t, uniform_grid(0.0, kPi, m), TailMode::Exact));
  }
  return plans;
}

HeatModel figure_model(const FigureOptions& o) { return make_model(o.theta, o.sigma, Domain::BoundedZeroPi, o.modes); }

std::ostringstream csv_stream() {
  std::ostringstream out;
  out.precision(17);
  return out;
}

// est[ti][g] = {theta_tilde, sigma2_tilde} along one path observed at t = 0.4 and t = 1.
using PathEstimates = std::vector<std::vector<std::pair<double, double>>>;

PathEstimates fixed_time_path(const HeatModel& model, const Plans (&plans)[2], std::uint64_t seed) {
  ModeField field(model, seed);
  PathEstimates est(2);
  for (std::size_t ti = 0; ti < 2; ++ti) {
    if (ti == 0) {
      field.draw_marginal(kTimes[0]);
    } else {
      field.advance(kTimes[1] - kTimes[0]);
    }
    for (const auto& plan : plans[ti]) {
      const PathSample s = field.space_section(*plan);
      est[ti].emplace_back(theta_tilde_fixed_time(s, model.sigma).estimate,
                           sigma2_tilde_fixed_time(s, model.theta).estimate);
    }
  }
  return est;
}

std::string figure1(const FigureOptions& o) {
  const HeatModel model = figure_model(o);
  const Plans plans[2] = {make_plans(model, kTimes[0]), make_plans(model, kTimes[1])};
  const auto est = fixed_time_path(model, plans, substream(o.seed, 0));
  const auto ms = figure_m_sweep();
  auto out = csv_stream();
  out << "m,t,theta_tilde,sigma2_tilde\n";
  for (std::size_t ti = 0; ti < 2; ++ti) {
    for (std::size_t g = 0; g < ms.size(); ++g) {
      out << ms[g] << ',' << kTimes[ti] << ',' << est[ti][g].first << ',' << est[ti][g].second << '\n';
    }
  }
  return out.str();
}

std::string figure23(int id, const FigureOptions& o) {
  if (o.replications < 2) throw std::invalid_argument("figures 2 and 3 need at least two replications");
  const HeatModel model = figure_model(o);
  const Plans plans[2] = {make_plans(model, kTimes[0]), make_plans(model, kTimes[1])};
  std::vector<PathEstimates> reps(o.replications);
  parallel_for(o.replications, [&](std::size_t r) { reps[r] = fixed_time_path(model, plans, substream(o.seed, r)); });

  const auto ms = figure_m_sweep();
  const double R = static_cast<double>(o.replications);
  auto out = csv_stream();
  if (id == 2) {
    out << "m,t,theta_mean,sigma2_mean,replications\n";
  } else {
    out << "m,t,theta_std,sigma2_std,theta_theory,sigma2_theory,replications\n";
  }
  for (std::size_t ti = 0; ti < 2; ++ti) {
    for (std::size_t g = 0; g < ms.size(); ++g) {
      CompensatedSum st, ss;
      for (const auto& rep : reps) {
        st.add(rep[ti][g].first);
        ss.add(rep[ti][g].second);
      }
      const double mt = st.value() / R, msig = ss.value() / R;
      out << ms[g] << ',' << kTimes[ti] << ',';
      if (id == 2) {
        out << mt << ',' << msig << ',' << o.replications << '\n';
        continue;
      }
      CompensatedSum vt, vs;
      for (const auto& rep : reps) {
        vt.add((rep[ti][g].first - mt) * (rep[ti][g].first - mt));
        vs.add((rep[ti][g].second - msig) * (rep[ti][g].second - msig));
      }
      const double scale = std::sqrt(2.0 / static_cast<double>(ms[g]));
      out << std::sqrt(vt.value() / (R - 1)) << ',' << std::sqrt(vs.value() / (R - 1)) << ','
          << o.theta * scale << ',' << o.sigma * o.sigma * scale << ',' << o.replications << '\n';
    }
  }
  return out.str();
}

std::string figure4(const FigureOptions& o) {
  const HeatModel model = figure_model(o);
  const auto ms = figure_m_sweep();
  auto out = csv_stream();
  out << "m,n,theta_avg,sigma2_avg\n";
  for (std::size_t n : {std::size_t{100}, std::size_t{500}}) {
    const double dt = 1.0 / static_cast<double>(n);
    const Plans plans = make_plans(model, dt);
    for (const auto& p : plans) {
      if (!p->stationary_tail()) throw std::runtime_error("figure 4 needs more Fourier modes");
    }
    ModeField field(model, substream(o.seed, n));
    std::vector<CompensatedSum> st(ms.size()), ss(ms.size());
    for (std::size_t i = 1; i <= n; ++i) {
      field.advance(dt);
      std::vector<std::pair<double, double>> est(ms.size());
      parallel_for(ms.size(), [&](std::size_t g) {
        const PathSample s = field.space_section(*plans[g]);
        est[g] = {theta_tilde_fixed_time(s, model.sigma).estimate, sigma2_tilde_fixed_time(s, model.theta).estimate};
      });
      for (std::size_t g = 0; g < ms.size(); ++g) {
        st[g].add(est[g].first);
        ss[g].add(est[g].second);
      }
    }
    for (std::size_t g = 0; g < ms.size(); ++g) {
      out << ms[g] << ',' << n << ',' << st[g].value() / static_cast<double>(n) << ','
          << ss[g].value() / static_cast<double>(n) << '\n';
    }
  }
  return out.str();
}

// u(t_i, x) for t_i = i/n, i = 1..n: retained modes of one ModeField plus the
// remainder of the modes above K, which is white in time at this step size.
std::string figure5(const FigureOptions& o) {
  const HeatModel model = figure_model(o);
  const auto ms = figure_m_sweep();
  const double x = kPi / 2;
  const Plans plans = make_plans(model, 1.0);
  auto out = csv_stream();
  out << "m,n,theta_bar,sigma2_bar\n";
  for (std::size_t n : {std::size_t{100}, std::size_t{400}, std::size_t{500}}) {
    const double dt = 1.0 / static_cast<double>(n);
    if (white_remainder_modes(model.theta, dt) > model.modes) {
      throw std::runtime_error("figure 5 needs more Fourier modes");
    }
    const std::uint64_t seed = substream(o.seed, 1000 + n);
    ModeField field(model, seed);
    NormalStream remainder(seed, kRemainderStream);
    std::vector<double> weights(model.modes);
    for (std::size_t k = 1; k <= model.modes; ++k) weights[k - 1] = eigenfunction(k, x);
    std::vector<double> values(n);
    for (std::size_t i = 1; i <= n; ++i) {
      field.advance(dt);
      const auto u = field.coefficients();
      const double sum = parallel_sum(0, model.modes, [&](std::size_t k) { return weights[k] * u[k]; });
      const double var = time_section_remainder_variance(model, x, model.modes, field.time());
      values[i - 1] = sum + std::sqrt(var) * remainder();
    }
    const PathSample ts(uniform_grid(dt, 1.0, n - 1), std::move(values));
    for (std::size_t g = 0; g < ms.size(); ++g) {
      const auto j = joint_estimate(ts, field.space_section(*plans[g]));
      out << ms[g] << ',' << n << ',' << j.theta.estimate << ',' << j.sigma2.estimate << '\n';
    }
  }
  return out.str();
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::invalid_argument("missing column '" + name + "'");
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

CsvTable parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  CsvTable t;
  if (!std::getline(in, line)) throw std::invalid_argument("empty figure data");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.header.size()) throw std::invalid_argument("short row in figure data: " + line);
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(std::stod(c));
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw std::invalid_argument("figure data has no rows");
  return t;
}

std::string group_label(const std::string& name, double v) {
  std::ostringstream s;
  s << name << '=' << v;
  return s.str();
}

// Series of `value` against column 0, one per distinct value of `group`.
std::vector<SvgSeries> grouped(const CsvTable& t, const std::string& group, const std::string& value,
                               const std::string& suffix, bool dashed) {
  const std::size_t gc = t.column(group), vc = t.column(value);
  std::map<double, SvgSeries> by;
  for (const auto& row : t.rows) {
    auto& s = by[row[gc]];
    if (s.label.empty()) s.label = group_label(group, row[gc]) + suffix;
    s.dashed = dashed;
    s.x.push_back(row[0]);
    s.y.push_back(row[vc]);
  }
  std::vector<SvgSeries> out;
  for (auto& [key, s] : by) out.push_back(std::move(s));
  return out;
}

}  // namespace

std::string figure_csv(int id, const FigureOptions& options) {
  switch (id) {
    case 1:
      return figure1(options);
    case 2:
    case 3:
      return figure23(id, options);
    case 4:
      return figure4(options);
    case 5:
      return figure5(options);
    default:
      throw std::invalid_argument("figure id must be 1..5");
  }
}

std::string render_figure(int id, const std::string& csv, const FigureOptions& o) {
  const CsvTable t = parse_csv(csv);
  const std::string group = t.header.size() > 1 ? t.header[1] : "";
  struct Layout {
    std::string theta_col, sigma_col, title, y_theta, y_sigma;
  };
  Layout L;
  switch (id) {
    case 1:
      L = {"theta_tilde", "sigma2_tilde", "Single path estimates, fixed time", "theta estimate", "sigma^2 estimate"};
      break;
    case 2:
      L = {"theta_mean", "sigma2_mean", "Sample means, fixed time", "mean of theta estimate",
           "mean of sigma^2 estimate"};
      break;
    case 3:
      L = {"theta_std", "sigma2_std", "Sample standard deviations, fixed time", "std of theta estimate",
           "std of sigma^2 estimate"};
      break;
    case 4:
      L = {"theta_avg", "sigma2_avg", "Estimates averaged over time sections", "theta estimate", "sigma^2 estimate"};
      break;
    case 5:
      L = {"theta_bar", "sigma2_bar", "Joint estimates", "theta estimate", "sigma^2 estimate"};
      break;
    default:
      throw std::invalid_argument("figure id must be 1..5");
  }
  SvgPanel left{"theta", "m", L.y_theta, grouped(t, group, L.theta_col, "", false), std::nullopt};
  SvgPanel right{"sigma^2", "m", L.y_sigma, grouped(t, group, L.sigma_col, "", false), std::nullopt};
  if (id == 3) {
    for (auto& s : grouped(t, group, "theta_theory", " theory", true)) left.series.push_back(std::move(s));
    for (auto& s : grouped(t, group, "sigma2_theory", " theory", true)) right.series.push_back(std::move(s));
  } else {
    left.reference = o.theta;
    right.reference = o.sigma * o.sigma;
  }
  const SvgPanel panels[] = {left, right};
  return render_svg(panels, L.title);
}

std::string reproduce_figure(int id, const FigureOptions& options, const std::string& out_dir) {
  const std::string csv = figure_csv(id, options);
  const std::string svg = render_figure(id, csv, options);
  std::filesystem::create_directories(out_dir);
  const auto base = std::filesystem::path(out_dir);
  const auto csv_path = base / ("fig" + std::to_string(id) + ".csv");
  std::ofstream c(csv_path, std::ios::binary);
  std::ofstream s(base / ("fig" + std::to_string(id) + ".svg"), std::ios::binary);
  if (!c || !s) throw std::runtime_error("cannot write figure files in " + out_dir);
  c << csv;
  s << svg;
  return csv_path.string();
}

}  // namespace heatvar
