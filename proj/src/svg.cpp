#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dpmpm::svg {

namespace {

constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 60;
constexpr int kTicks = 5;

const char* const kPalette[] = {"#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2",
                                "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(x) < 1e-12 ? 0.0 : x);
  return buf;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x1 > x0 ? (x - x0) / (x1 - x0) : 0.5) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    return kHeight - kBottom - (y1 > y0 ? (y - y0) / (y1 - y0) : 0.5) * (kHeight - kTop - kBottom);
  }
};

std::string header(const std::string& title) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\" width=\"800\" height=\"500\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
  out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
         escape(title) + "</text>\n";
  return out;
}

// Axes, y ticks, and x ticks when `numeric_x` is set.
std::string axes(const Frame& f, const std::string& xlabel, const std::string& ylabel, bool numeric_x) {
  const double left = kLeft, right = kWidth - kRight, top = kTop, bottom = kHeight - kBottom;
  std::string out = "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n";
  out += "<line x1=\"" + num(left) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(right) + "\" y2=\"" + num(bottom) + "\"/>\n";
  out += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" + num(bottom) + "\"/>\n";
  out += "</g>\n<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int i = 0; i < kTicks; ++i) {
    const double v = f.y0 + (f.y1 - f.y0) * i / (kTicks - 1);
    const double y = f.py(v);
    out += "<line x1=\"" + num(left - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(left) + "\" y2=\"" + num(y) +
           "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + num(left - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + tick_label(v) + "</text>\n";
  }
  if (numeric_x) {
    for (int i = 0; i < kTicks; ++i) {
      const double v = f.x0 + (f.x1 - f.x0) * i / (kTicks - 1);
      const double x = f.px(v);
      out += "<line x1=\"" + num(x) + "\" y1=\"" + num(bottom) + "\" x2=\"" + num(x) + "\" y2=\"" + num(bottom + 5) +
             "\" stroke=\"black\"/>\n";
      out += "<text x=\"" + num(x) + "\" y=\"" + num(bottom + 18) + "\" text-anchor=\"middle\">" + tick_label(v) +
             "</text>\n";
    }
  }
  out += "</g>\n";
  out += "<text x=\"" + num((left + right) / 2) + "\" y=\"" + num(kHeight - 15) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(xlabel) + "</text>\n";
  out += "<text x=\"18\" y=\"" + num((top + bottom) / 2) + "\" transform=\"rotate(-90 18 " + num((top + bottom) / 2) +
         ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(ylabel) + "</text>\n";
  return out;
}

std::pair<double, double> range_of(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 1.0};
  auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return {*lo, *hi};
}

}  // namespace

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string line_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<double>& x, const std::vector<double>& y) {
  auto [x0, x1] = range_of(x);
  auto [ylo, yhi] = range_of(y);
  // Integer-friendly vertical range that always contains the data.
  const double y0 = std::floor(std::min(0.0, ylo));
  double y1 = std::ceil(yhi);
  if (y1 <= y0) y1 = y0 + 1;
  const Frame f{x0, x1, y0, y1};
  std::string out = header(title) + axes(f, xlabel, ylabel, true);
  out += "<polyline class=\"series\" fill=\"none\" stroke=\"#4e79a7\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i) out.push_back(' ');
    out += num(f.px(x[i])) + "," + num(f.py(y[i]));
  }
  out += "\"/>\n</svg>\n";
  return out;
}

std::string stem_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                      const std::vector<double>& x, const std::vector<double>& y, double ymin, double ymax) {
  auto [x0, x1] = range_of(x);
  const Frame f{x0, x1, ymin, ymax};
  std::string out = header(title) + axes(f, xlabel, ylabel, true);
  const double zero = f.py(0.0);
  out += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(zero) + "\" x2=\"" + num(kWidth - kRight) + "\" y2=\"" +
         num(zero) + "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  out += "<g class=\"series\" stroke=\"#4e79a7\" stroke-width=\"2\">\n";
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double px = f.px(x[i]);
    out += "<line x1=\"" + num(px) + "\" y1=\"" + num(zero) + "\" x2=\"" + num(px) + "\" y2=\"" + num(f.py(y[i])) +
           "\"/>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

std::string grouped_bars(const std::string& title, const std::string& ylabel, const std::vector<std::string>& categories,
                         const std::vector<Series>& series) {
  double top = 0.0;
  for (const auto& s : series) {
    for (double v : s.values) top = std::max(top, v);
  }
  top = top > 0.0 ? std::ceil(top / 10.0) * 10.0 : 1.0;
  const Frame f{0.0, 1.0, 0.0, top};
  std::string out = header(title) + axes(f, "", ylabel, false);
  const double plot_w = kWidth - kLeft - kRight;
  const double group_w = categories.empty() ? plot_w : plot_w / static_cast<double>(categories.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(series.size(), 1));
  const double base = f.py(0.0);
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = s == 0 ? "#404040" : kPalette[(s - 1) % std::size(kPalette)];
    out += "<g series=\"" + escape(series[s].name) + "\" fill=\"" + color + "\">\n";
    for (std::size_t c = 0; c < categories.size() && c < series[s].values.size(); ++c) {
      const double x = kLeft + group_w * (static_cast<double>(c) + 0.1) + bar_w * static_cast<double>(s);
      const double y = f.py(series[s].values[c]);
      out += "<rect series=\"" + escape(series[s].name) + "\" x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
             num(bar_w) + "\" height=\"" + num(base - y) + "\"/>\n";
    }
    out += "</g>\n";
  }
  out += "<g class=\"categories\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double x = kLeft + group_w * (static_cast<double>(c) + 0.5);
    out += "<text x=\"" + num(x) + "\" y=\"" + num(base + 18) + "\" text-anchor=\"middle\">" + escape(categories[c]) +
           "</text>\n";
  }
  out += "</g>\n<g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = s == 0 ? "#404040" : kPalette[(s - 1) % std::size(kPalette)];
    const double x = kLeft + 10 + 70.0 * static_cast<double>(s % 10);
    const double y = kHeight - 28 + 13.0 * static_cast<double>(s / 10);
    out += "<rect x=\"" + num(x) + "\" y=\"" + num(y - 9) + "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
    out += "<text x=\"" + num(x + 14) + "\" y=\"" + num(y) + "\">" + escape(series[s].name) + "</text>\n";
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace dpmpm::svg
