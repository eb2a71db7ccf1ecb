#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace heatvar {

/// Uniform partition of [a, b] into m subintervals.
///
/// Points are computed as a + (b - a) * j / m so that the first and last
/// points equal a and b exactly.
class UniformGrid {
 public:
  UniformGrid(double a, double b, std::size_t m);

  double a() const { return a_; }
  double b() const { return b_; }
  std::size_t m() const { return m_; }
  double length() const { return b_ - a_; }
  double mesh() const { return (b_ - a_) / static_cast<double>(m_); }

  double point(std::size_t j) const;
  std::vector<double> points() const;

  bool operator==(const UniformGrid&) const = default;

 private:
  double a_;
  double b_;
  std::size_t m_;
};

/// Throws std::domain_error unless a < b and m >= 1.
UniformGrid uniform_grid(double a, double b, std::size_t m);

/// Values of a scalar process on the points of a UniformGrid.
class PathSample {
 public:
  PathSample(UniformGrid grid, std::vector<double> values);

  const UniformGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t j) const { return values_[j]; }

 private:
  UniformGrid grid_;
  std::vector<double> values_;
};

/// Consecutive differences values[j] - values[j-1], j = 1..m.
std::vector<double> increments(const PathSample& sample);

/// Sum of |X(x_j) - X(x_{j-1})|^p over the grid, p >= 1.
/// Uses Neumaier-compensated accumulation; p = 2 and p = 4 avoid pow().
double power_variation(const PathSample& sample, double p);

/// Same as power_variation but over an explicit value sequence.
double power_variation(std::span<const double> values, double p);

/// Neumaier (improved Kahan) running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  void add(const CompensatedSum& other) {
    add(other.sum_);
    add(other.comp_);
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// CSV path format: header "<axis>,value", one row per grid point, 17 significant digits.
void write_path_csv(std::ostream& out, const PathSample& sample, std::string_view axis = "x");
void write_path_csv(const std::string& path, const PathSample& sample, std::string_view axis = "x");

/// Reads a path CSV; the grid is reconstructed from the first and last
/// abscissa and checked for uniformity.
PathSample read_path_csv(std::istream& in);
PathSample read_path_csv(const std::string& path);

}  // namespace heatvar
