#include "hifi/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "hifi/errors.hpp"

namespace hifi {
namespace {

constexpr int kWidth = 900;
constexpr int kPanelHeight = 280;
constexpr int kMarginLeft = 80;
constexpr int kMarginRight = 20;
constexpr int kMarginTop = 40;
constexpr int kMarginBottom = 40;
constexpr Eigen::Index kMaxPoints = 2000;
constexpr const char* kTrueColor = "#1f77b4";
constexpr const char* kEstimateColor = "#d62728";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Series {
  std::vector<double> t;
  std::vector<double> truth;
  std::vector<double> estimate;
};

/// Pulls one objective component and its estimate out of the trace,
/// downsampling by a constant stride when the trace is long.
Series extract(const SimTrace& trace, int state_col) {
  const Eigen::Index n = trace.rows();
  const Eigen::Index stride = n > kMaxPoints ? (n + kMaxPoints - 1) / kMaxPoints : 1;
  Series s;
  for (Eigen::Index k = 0; k < n; k += stride) {
    s.t.push_back(trace.t(k));
    s.truth.push_back(trace.x_a(k, state_col));
    s.estimate.push_back(trace.x_a(k, state_col) - trace.e(k, state_col));
  }
  return s;
}

std::string polyline(const Series& s, const std::vector<double>& values,
                     double t_lo, double t_hi, double v_lo, double v_hi,
                     int top, const char* color) {
  const double x0 = kMarginLeft;
  const double x1 = kWidth - kMarginRight;
  const double y0 = top + kPanelHeight - kMarginBottom;  // value minimum
  const double y1 = top + kMarginTop;                    // value maximum
  const double t_span = t_hi > t_lo ? t_hi - t_lo : 1.0;
  const double v_span = v_hi > v_lo ? v_hi - v_lo : 1.0;

  std::string out = "  <polyline fill=\"none\" stroke=\"";
  out += color;
  out += "\" stroke-width=\"1.2\" points=\"";
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    const double px = x0 + (s.t[i] - t_lo) / t_span * (x1 - x0);
    const double py = y0 + (values[i] - v_lo) / v_span * (y1 - y0);
    out += fmt(px);
    out += ',';
    out += fmt(py);
    out += ' ';
  }
  out += "\"/>\n";
  return out;
}

std::string text(double x, double y, const std::string& body,
                 const char* anchor = "start", const char* fill = "#333333") {
  std::string out = "  <text x=\"" + fmt(x) + "\" y=\"" + fmt(y) +
                    "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"";
  out += fill;
  out += "\" text-anchor=\"";
  out += anchor;
  out += "\">" + body + "</text>\n";
  return out;
}

std::string panel(const SimTrace& trace, int state_col, int top,
                  const std::string& title) {
  Series s = extract(trace, state_col);
  double t_lo = 0.0, t_hi = 1.0, v_lo = 0.0, v_hi = 1.0;
  if (!s.t.empty()) {
    t_lo = *std::min_element(s.t.begin(), s.t.end());
    t_hi = *std::max_element(s.t.begin(), s.t.end());
    v_lo = std::min(*std::min_element(s.truth.begin(), s.truth.end()),
                    *std::min_element(s.estimate.begin(), s.estimate.end()));
    v_hi = std::max(*std::max_element(s.truth.begin(), s.truth.end()),
                    *std::max_element(s.estimate.begin(), s.estimate.end()));
  }
  if (!(v_hi > v_lo)) {
    v_lo -= 0.5;
    v_hi += 0.5;
  }

  const double x0 = kMarginLeft;
  const double x1 = kWidth - kMarginRight;
  const double y_bottom = top + kPanelHeight - kMarginBottom;
  const double y_top = top + kMarginTop;

  std::string out;
  out += "  <rect x=\"" + fmt(x0) + "\" y=\"" + fmt(y_top) + "\" width=\"" +
         fmt(x1 - x0) + "\" height=\"" + fmt(y_bottom - y_top) +
         "\" fill=\"none\" stroke=\"#999999\"/>\n";
  out += text((x0 + x1) / 2, y_top - 10, title, "middle", "#000000");
  // Value range ticks on the left edge, time range ticks on the bottom.
  out += text(x0 - 6, y_bottom + 4, fmt(v_lo), "end");
  out += text(x0 - 6, y_top + 4, fmt(v_hi), "end");
  out += text(x0, y_bottom + 16, fmt(t_lo), "middle");
  out += text(x1, y_bottom + 16, fmt(t_hi), "middle");
  out += text((x0 + x1) / 2, y_bottom + 30, "time [s]", "middle");
  if (!s.t.empty()) {
    out += polyline(s, s.truth, t_lo, t_hi, v_lo, v_hi, top, kTrueColor);
    out += polyline(s, s.estimate, t_lo, t_hi, v_lo, v_hi, top, kEstimateColor);
  }
  return out;
}

}  // namespace

void write_trace_svg(const std::string& path, const SimTrace& trace) {
  const int height = 2 * kPanelHeight + 40;
  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         std::to_string(kWidth) + "\" height=\"" + std::to_string(height) +
         "\" viewBox=\"0 0 " + std::to_string(kWidth) + " " +
         std::to_string(height) + "\">\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += panel(trace, 2, 0, "suspension deflection");
  svg += panel(trace, 3, kPanelHeight, "sprung-mass velocity");

  // Shared legend under the second panel.
  const double ly = 2.0 * kPanelHeight + 20.0;
  svg += "  <line x1=\"" + fmt(kMarginLeft) + "\" y1=\"" + fmt(ly) +
         "\" x2=\"" + fmt(kMarginLeft + 30) + "\" y2=\"" + fmt(ly) +
         "\" stroke=\"" + kTrueColor + "\" stroke-width=\"2\"/>\n";
  svg += text(kMarginLeft + 36, ly + 4, "true state");
  svg += "  <line x1=\"" + fmt(kMarginLeft + 150) + "\" y1=\"" + fmt(ly) +
         "\" x2=\"" + fmt(kMarginLeft + 180) + "\" y2=\"" + fmt(ly) +
         "\" stroke=\"" + kEstimateColor + "\" stroke-width=\"2\"/>\n";
  svg += text(kMarginLeft + 186, ly + 4, "filter estimate");
  svg += "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  out << svg;
  if (!out) throw ParseError("failed while writing '" + path + "'");
}

}  // namespace hifi
