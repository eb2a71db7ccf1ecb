#include "heatvar/grid.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace heatvar {

UniformGrid::UniformGrid(double a, double b, std::size_t m) : a_(a), b_(b), m_(m) {
  if (!(std::isfinite(a) && std::isfinite(b)) || !(a < b)) {
    throw std::domain_error("uniform grid requires finite a < b");
  }
  if (m == 0) {
    throw std::domain_error("uniform grid requires m >= 1");
  }
}

double UniformGrid::point(std::size_t j) const {
  if (j == m_) return b_;
  return a_ + (b_ - a_) * static_cast<double>(j) / static_cast<double>(m_);
}

std::vector<double> UniformGrid::points() const {
  std::vector<double> pts(m_ + 1);
  for (std::size_t j = 0; j <= m_; ++j) pts[j] = point(j);
  return pts;
}

UniformGrid uniform_grid(double a, double b, std::size_t m) { return UniformGrid(a, b, m); }

PathSample::PathSample(UniformGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.m() + 1) {
    throw std::invalid_argument("path sample needs m + 1 values");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("path sample values must be finite");
  }
}

std::vector<double> increments(const PathSample& sample) {
  const auto v = sample.values();
  std::vector<double> d(v.size() - 1);
  for (std::size_t j = 1; j < v.size(); ++j) d[j - 1] = v[j] - v[j - 1];
  return d;
}

double power_variation(std::span<const double> values, double p) {
  if (!(p >= 1.0)) throw std::domain_error("power variation requires p >= 1");
  CompensatedSum acc;
  if (p == 2.0) {
    for (std::size_t j = 1; j < values.size(); ++j) {
      const double d = values[j] - values[j - 1];
      acc.add(d * d);
    }
  } else if (p == 4.0) {
    for (std::size_t j = 1; j < values.size(); ++j) {
      const double d = values[j] - values[j - 1];
      const double d2 = d * d;
      acc.add(d2 * d2);
    }
  } else {
    for (std::size_t j = 1; j < values.size(); ++j) {
      const double d = std::fabs(values[j] - values[j - 1]);
      if (d > 0.0) acc.add(std::exp(p * std::log(d)));
    }
  }
  return acc.value();
}

double power_variation(const PathSample& sample, double p) {
  return power_variation(sample.values(), p);
}

void write_path_csv(std::ostream& out, const PathSample& sample, std::string_view axis) {
  out << axis << ",value\n";
  out << std::setprecision(17);
  const auto& g = sample.grid();
  for (std::size_t j = 0; j <= g.m(); ++j) {
    out << g.point(j) << ',' << sample[j] << '\n';
  }
}

void write_path_csv(const std::string& path, const PathSample& sample, std::string_view axis) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  write_path_csv(out, sample, axis);
}

namespace {

double parse_double(std::string_view s, std::size_t line_no) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error("malformed number on line " + std::to_string(line_no));
  }
  return v;
}

}  // namespace

PathSample read_path_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty path CSV");
  std::vector<double> xs;
  std::vector<double> vs;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("expected two columns on line " + std::to_string(line_no));
    }
    std::string_view sv(line);
    xs.push_back(parse_double(sv.substr(0, comma), line_no));
    vs.push_back(parse_double(sv.substr(comma + 1), line_no));
  }
  if (xs.size() < 2) throw std::runtime_error("path CSV needs at least two rows");
  UniformGrid grid(xs.front(), xs.back(), xs.size() - 1);
  const double tol = 1e-9 * std::max(1.0, std::fabs(grid.b()) + std::fabs(grid.a()));
  for (std::size_t j = 0; j < xs.size(); ++j) {
    if (std::fabs(xs[j] - grid.point(j)) > tol) {
      throw std::runtime_error("path CSV abscissae are not a uniform partition");
    }
  }
  return PathSample(grid, std::move(vs));
}

PathSample read_path_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_path_csv(in);
}

}  // namespace heatvar
