#pragma once

// Minimal deterministic SVG line charts: side-by-side panels, one polyline
// per series, optional horizontal reference rule.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace heatvar {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct SvgPanel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<SvgSeries> series;
  std::optional<double> reference;  // drawn as a horizontal rule
};

/// Throws std::invalid_argument for no panels, an empty panel, or a series
/// with no points or mismatched x/y lengths.
std::string render_svg(std::span<const SvgPanel> panels, const std::string& title);

}  // namespace heatvar
