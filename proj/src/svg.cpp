#include "safecontact/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace safecontact::svg {

namespace {

constexpr double kW = 640, kH = 400, kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof(b), "%.2f", v);
  return b;
}

std::string escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\" "
         "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"640\" height=\"400\" fill=\"white\"/>\n"
         "<text x=\"320\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" +
         escape(title) + "</text>\n";
}

std::string axes(double y_lo, double y_hi, const std::string& x_label, const std::string& y_label) {
  std::string o;
  o += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kH - kBottom) + "\" x2=\"" + num(kW - kRight) + "\" y2=\"" +
       num(kH - kBottom) + "\" stroke=\"black\"/>\n";
  o += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(kH - kBottom) +
       "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = y_lo + (y_hi - y_lo) * k / 4.0;
    const double y = kH - kBottom - (kH - kTop - kBottom) * k / 4.0;
    char b[32];
    std::snprintf(b, sizeof(b), "%.3g", v);
    o += "<text x=\"" + num(kLeft - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + b + "</text>\n";
  }
  o += "<text x=\"" + num((kLeft + kW - kRight) / 2) + "\" y=\"" + num(kH - 15) + "\" text-anchor=\"middle\">" +
       escape(x_label) + "</text>\n";
  o += "<text x=\"16\" y=\"" + num((kTop + kH - kBottom) / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num((kTop + kH - kBottom) / 2) + ")\">" + escape(y_label) + "</text>\n";
  return o;
}

std::string legend(const std::vector<Series>& series) {
  std::string o;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 14 * i;
    o += "<rect x=\"" + num(kW - kRight - 120) + "\" y=\"" + num(y) + "\" width=\"10\" height=\"10\" fill=\"" +
         kPalette[i % 6] + "\"/>\n";
    o += "<text x=\"" + num(kW - kRight - 105) + "\" y=\"" + num(y + 9) + "\">" + escape(series[i].label) +
         "</text>\n";
  }
  return o;
}

double nice_max(double v) { return v > 0 && std::isfinite(v) ? v * 1.05 : 1.0; }

}  // namespace

std::string bar_chart(const std::string& title, const std::vector<std::string>& labels,
                      const std::vector<double>& values, const std::string& y_label) {
  double hi = 0;
  for (double v : values)
    if (std::isfinite(v)) hi = std::max(hi, v);
  hi = nice_max(hi);
  std::string o = header(title) + axes(0, hi, "", y_label);
  const double plot_w = kW - kLeft - kRight, plot_h = kH - kTop - kBottom;
  const double slot = values.empty() ? plot_w : plot_w / static_cast<double>(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double v = std::isfinite(values[i]) ? values[i] : 0.0;
    const double h = plot_h * v / hi;
    const double x = kLeft + slot * i + slot * 0.15;
    o += "<rect x=\"" + num(x) + "\" y=\"" + num(kH - kBottom - h) + "\" width=\"" + num(slot * 0.7) +
         "\" height=\"" + num(h) + "\" fill=\"" + kPalette[i % 6] + "\"/>\n";
    o += "<text x=\"" + num(x + slot * 0.35) + "\" y=\"" + num(kH - kBottom + 16) + "\" text-anchor=\"middle\">" +
         escape(labels[i]) + "</text>\n";
    char b[32];
    std::snprintf(b, sizeof(b), "%.2f", values[i]);
    o += "<text x=\"" + num(x + slot * 0.35) + "\" y=\"" + num(kH - kBottom - h - 4) + "\" text-anchor=\"middle\">" +
         b + "</text>\n";
  }
  return o + "</svg>\n";
}

std::string histogram(const std::string& title, const std::vector<Series>& series, int bins,
                      const std::string& x_label, std::optional<double> marker) {
  double lo = 0, hi = marker.value_or(0.0);
  for (const auto& s : series)
    for (double v : s.values)
      if (std::isfinite(v)) hi = std::max(hi, v);
  hi = nice_max(hi);
  const double width = (hi - lo) / bins;
  std::vector<std::vector<double>> counts;
  double top = 0;
  for (const auto& s : series) {
    std::vector<double> c(bins, 0.0);
    for (double v : s.values) {
      if (!std::isfinite(v)) continue;
      const int b = std::clamp(static_cast<int>((v - lo) / width), 0, bins - 1);
      c[b] += 1;
    }
    for (double x : c) top = std::max(top, x);
    counts.push_back(std::move(c));
  }
  top = nice_max(top);
  std::string o = header(title) + axes(0, top, x_label, "episodes");
  const double plot_w = kW - kLeft - kRight, plot_h = kH - kTop - kBottom;
  const double bw = plot_w / bins;
  for (std::size_t s = 0; s < counts.size(); ++s) {
    for (int b = 0; b < bins; ++b) {
      const double h = plot_h * counts[s][b] / top;
      if (h <= 0) continue;
      o += "<rect x=\"" + num(kLeft + bw * b) + "\" y=\"" + num(kH - kBottom - h) + "\" width=\"" + num(bw) +
           "\" height=\"" + num(h) + "\" fill=\"" + kPalette[s % 6] + "\" fill-opacity=\"0.45\"/>\n";
    }
  }
  if (marker) {
    const double x = kLeft + plot_w * (*marker - lo) / (hi - lo);
    o += "<line x1=\"" + num(x) + "\" y1=\"" + num(kTop) + "\" x2=\"" + num(x) + "\" y2=\"" + num(kH - kBottom) +
         "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  }
  char b[32];
  std::snprintf(b, sizeof(b), "%.3g", hi);
  o += "<text x=\"" + num(kW - kRight) + "\" y=\"" + num(kH - kBottom + 16) + "\" text-anchor=\"end\">" + b +
       "</text>\n<text x=\"" + num(kLeft) + "\" y=\"" + num(kH - kBottom + 16) + "\">0</text>\n";
  return o + legend(series) + "</svg>\n";
}

std::string line_chart(const std::string& title, const std::vector<Series>& series, const std::string& x_label,
                       const std::string& y_label, std::optional<double> marker) {
  double hi = marker.value_or(0.0);
  std::size_t len = 1;
  for (const auto& s : series) {
    len = std::max(len, s.values.size());
    for (double v : s.values)
      if (std::isfinite(v)) hi = std::max(hi, v);
  }
  hi = nice_max(hi);
  std::string o = header(title) + axes(0, hi, x_label, y_label);
  const double plot_w = kW - kLeft - kRight, plot_h = kH - kTop - kBottom;
  const double dx = len > 1 ? plot_w / static_cast<double>(len - 1) : plot_w;
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::string pts;
    for (std::size_t t = 0; t < series[s].values.size(); ++t) {
      const double v = std::isfinite(series[s].values[t]) ? series[s].values[t] : 0.0;
      pts += num(kLeft + dx * t) + "," + num(kH - kBottom - plot_h * v / hi) + " ";
    }
    o += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[s % 6]) + "\" stroke-width=\"1.5\" points=\"" +
         pts + "\"/>\n";
  }
  if (marker) {
    const double y = kH - kBottom - plot_h * *marker / hi;
    o += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(y) + "\" x2=\"" + num(kW - kRight) + "\" y2=\"" + num(y) +
         "\" stroke=\"black\" stroke-dasharray=\"4 3\"/>\n";
  }
  return o + legend(series) + "</svg>\n";
}

}  // namespace safecontact::svg
