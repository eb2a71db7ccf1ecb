#include "heatvar/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace heatvar {

namespace {

constexpr double kPanelW = 480, kPanelH = 360;
constexpr double kLeft = 70, kRight = 20, kTop = 50, kBottom = 50;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::fabs(v) < 1e-14 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Round step 1, 2 or 5 times a power of ten giving about `count` ticks.
std::vector<double> nice_ticks(double lo, double hi, int count) {
  const double raw = (hi - lo) / count;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    if (f * mag >= raw) {
      step = f * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) ticks.push_back(v);
  return ticks;
}

void render_panel(std::ostringstream& out, const SvgPanel& panel, double x0) {
  if (panel.series.empty()) throw std::invalid_argument("panel '" + panel.title + "' has no series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const auto& s : panel.series) {
    if (s.x.empty() || s.x.size() != s.y.size()) {
      throw std::invalid_argument("series '" + s.label + "' is empty or has mismatched lengths");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) throw std::invalid_argument("panel '" + panel.title + "' has no finite points");
  if (panel.reference) {
    ymin = std::min(ymin, *panel.reference);
    ymax = std::max(ymax, *panel.reference);
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) {
    const double pad = ymin == 0.0 ? 1.0 : 0.05 * std::fabs(ymin);
    ymin -= pad;
    ymax += pad;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  const double pw = kPanelW - kLeft - kRight, ph = kPanelH - kTop - kBottom;
  auto px = [&](double v) { return x0 + kLeft + (v - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double v) { return kTop + (ymax - v) / (ymax - ymin) * ph; };

  out << "<g>\n";
  out << "<rect x=\"" << fmt(x0 + kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(pw) << "\" height=\""
      << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << "<text x=\"" << fmt(x0 + kLeft + pw / 2) << "\" y=\"" << fmt(kTop - 10)
      << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(panel.title) << "</text>\n";
  for (double v : nice_ticks(xmin, xmax, 5)) {
    out << "<line x1=\"" << fmt(px(v)) << "\" y1=\"" << fmt(kTop + ph) << "\" x2=\"" << fmt(px(v)) << "\" y2=\""
        << fmt(kTop + ph + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(px(v)) << "\" y=\"" << fmt(kTop + ph + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << tick_label(v) << "</text>\n";
  }
  for (double v : nice_ticks(ymin, ymax, 5)) {
    out << "<line x1=\"" << fmt(x0 + kLeft - 5) << "\" y1=\"" << fmt(py(v)) << "\" x2=\"" << fmt(x0 + kLeft)
        << "\" y2=\"" << fmt(py(v)) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << fmt(x0 + kLeft - 8) << "\" y=\"" << fmt(py(v) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(v) << "</text>\n";
  }
  out << "<text x=\"" << fmt(x0 + kLeft + pw / 2) << "\" y=\"" << fmt(kPanelH - 10)
      << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(panel.x_label) << "</text>\n";
  out << "<text x=\"" << fmt(x0 + 15) << "\" y=\"" << fmt(kTop + ph / 2) << "\" text-anchor=\"middle\" font-size=\"12\""
      << " transform=\"rotate(-90 " << fmt(x0 + 15) << ' ' << fmt(kTop + ph / 2) << ")\">" << escape(panel.y_label)
      << "</text>\n";
  if (panel.reference) {
    out << "<line x1=\"" << fmt(x0 + kLeft) << "\" y1=\"" << fmt(py(*panel.reference)) << "\" x2=\""
        << fmt(x0 + kLeft + pw) << "\" y2=\"" << fmt(py(*panel.reference))
        << "\" stroke=\"gray\" stroke-dasharray=\"2,3\"/>\n";
  }
  for (std::size_t k = 0; k < panel.series.size(); ++k) {
    const auto& s = panel.series[k];
    const char* color = kColors[k % (sizeof kColors / sizeof kColors[0])];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (s.dashed) out << " stroke-dasharray=\"6,4\"";
    out << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      out << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
    }
    out << "\"/>\n";
    const double ly = kTop + 15 + 15 * static_cast<double>(k);
    out << "<line x1=\"" << fmt(x0 + kLeft + pw - 110) << "\" y1=\"" << fmt(ly) << "\" x2=\""
        << fmt(x0 + kLeft + pw - 90) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color << "\"";
    if (s.dashed) out << " stroke-dasharray=\"6,4\"";
    out << "/>\n";
    out << "<text x=\"" << fmt(x0 + kLeft + pw - 85) << "\" y=\"" << fmt(ly + 4) << "\" font-size=\"11\">"
        << escape(s.label) << "</text>\n";
  }
  out << "</g>\n";
}

}  // namespace

std::string render_svg(std::span<const SvgPanel> panels, const std::string& title) {
  if (panels.empty()) throw std::invalid_argument("no panels to render");
  std::ostringstream out;
  const double width = kPanelW * static_cast<double>(panels.size());
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(kPanelH + 20)
      << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(kPanelH + 20) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << fmt(width / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
      << "</text>\n";
  out << "<g transform=\"translate(0,20)\">\n";
  for (std::size_t p = 0; p < panels.size(); ++p) render_panel(out, panels[p], kPanelW * static_cast<double>(p));
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace heatvar
