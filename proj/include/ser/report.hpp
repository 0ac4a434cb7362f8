#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ser {

inline constexpr const char* kCsvHeader = "env,sampler,agent,seed,env_step,eval_return";

// One learning-curve point as serialized to CSV.
struct CsvRow {
  std::string env;
  std::string sampler;
  std::string agent;
  int seed = 0;
  long long env_step = 0;
  double eval_return = 0.0;

  bool operator==(const CsvRow&) const = default;
};

// Writes header plus one row per point, in the given order. Floating-point
// values are printed so that parsing restores identical doubles.
inline void emit_csv(std::span<const CsvRow> rows, std::ostream& out) {
  out << kCsvHeader << '\n';
  char line[256];
  for (const CsvRow& r : rows) {
    std::snprintf(line, sizeof(line), "%s,%s,%s,%d,%lld,%.17g\n", r.env.c_str(),
                  r.sampler.c_str(), r.agent.c_str(), r.seed, r.env_step, r.eval_return);
    out << line;
  }
}

inline std::vector<CsvRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::invalid_argument("bad or missing CSV header");

  std::vector<CsvRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 6)
      throw std::invalid_argument("CSV row needs 6 fields: " + line);
    CsvRow r;
    r.env = fields[0];
    r.sampler = fields[1];
    r.agent = fields[2];
    try {
      std::size_t used = 0;
      r.seed = std::stoi(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("seed");
      r.env_step = std::stoll(fields[4], &used);
      if (used != fields[4].size()) throw std::invalid_argument("env_step");
      r.eval_return = std::stod(fields[5], &used);
      if (used != fields[5].size()) throw std::invalid_argument("eval_return");
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed CSV row: " + line);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

// One curve to draw: the mean polyline and its standard-error band.
struct PlotSeries {
  std::string label;
  std::vector<long long> steps;
  std::vector<double> mean;
  std::vector<double> std_error;
};

namespace detail {

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&')
      out += "&amp;";
    else if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else
      out += c;
  }
  return out;
}

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// Tick positions at a 1/2/5 power-of-ten pitch covering [lo, hi].
inline std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double pitch = mag;
  for (double candidate : {1.0, 2.0, 5.0, 10.0}) {
    pitch = candidate * mag;
    if (pitch >= raw) break;
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / pitch) * pitch; t <= hi + 1e-9 * pitch; t += pitch)
    ticks.push_back(std::abs(t) < 1e-12 * pitch ? 0.0 : t);
  return ticks;
}

}  // namespace detail

// Standalone SVG learning-curve figure: per series one mean polyline and one
// translucent standard-error band, plus axes with tick labels and a legend.
// Output bytes are a pure function of the input.
inline void emit_svg_plot(std::span<const PlotSeries> series, std::ostream& out,
                          const std::string& title = "") {
  if (series.empty()) throw std::invalid_argument("nothing to plot");
  for (const PlotSeries& s : series) {
    if (s.steps.size() < 2) throw std::invalid_argument("a series needs >= 2 points");
    if (s.mean.size() != s.steps.size() || s.std_error.size() != s.steps.size())
      throw std::invalid_argument("series arrays must have equal length");
  }

  constexpr double kWidth = 860, kHeight = 520;
  constexpr double kLeft = 80, kRight = 30, kTop = 46, kBottom = 64;
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;

  double x_lo = 1e300, x_hi = -1e300, y_lo = 1e300, y_hi = -1e300;
  for (const PlotSeries& s : series)
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      x_lo = std::min(x_lo, static_cast<double>(s.steps[i]));
      x_hi = std::max(x_hi, static_cast<double>(s.steps[i]));
      y_lo = std::min(y_lo, s.mean[i] - 2.0 * s.std_error[i]);
      y_hi = std::max(y_hi, s.mean[i] + 2.0 * s.std_error[i]);
    }
  if (y_hi == y_lo) {
    y_hi += 1.0;
    y_lo -= 1.0;
  }
  const double y_pad = 0.05 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  const auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
  const auto py = [&](double y) { return kTop + (y_hi - y) / (y_hi - y_lo) * plot_h; };

  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#9467bd", "#ff7f0e", "#8c564b"};
  using detail::fmt;

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
      << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" fill=\"white\"/>\n";
  if (!title.empty())
    out << "<text x=\"" << kWidth / 2
        << "\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"17\">"
        << detail::xml_escape(title) << "</text>\n";

  // Axes and ticks.
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
      << kLeft + plot_w << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
      << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
  for (double t : detail::nice_ticks(x_lo, x_hi, 6)) {
    const double x = px(t);
    out << "<line x1=\"" << fmt(x) << "\" y1=\"" << kTop + plot_h << "\" x2=\""
        << fmt(x) << "\" y2=\"" << kTop + plot_h + 5
        << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << fmt(x) << "\" y=\"" << kTop + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
        << fmt(t) << "</text>\n";
  }
  for (double t : detail::nice_ticks(y_lo, y_hi, 6)) {
    const double y = py(t);
    out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << kLeft
        << "\" y2=\"" << fmt(y) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    out << "<text x=\"" << kLeft - 9 << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(t)
        << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
         "environment steps</text>\n";
  out << "<text x=\"22\" y=\"" << kTop + plot_h / 2
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\" "
         "transform=\"rotate(-90 22 "
      << kTop + plot_h / 2 << ")\">mean evaluation return</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const PlotSeries& s = series[k];
    const char* color = kPalette[k % 6];

    out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" "
        << "points=\"";
    for (std::size_t i = 0; i < s.steps.size(); ++i)
      out << fmt(px(static_cast<double>(s.steps[i]))) << ","
          << fmt(py(s.mean[i] + s.std_error[i])) << " ";
    for (std::size_t i = s.steps.size(); i-- > 0;)
      out << fmt(px(static_cast<double>(s.steps[i]))) << ","
          << fmt(py(s.mean[i] - s.std_error[i])) << " ";
    out << "\"/>\n";

    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.steps.size(); ++i)
      out << fmt(px(static_cast<double>(s.steps[i]))) << "," << fmt(py(s.mean[i]))
          << " ";
    out << "\"/>\n";
  }

  // Legend, top right inside the plot area.
  const double legend_x = kLeft + plot_w - 190, legend_y = kTop + 12;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double y = legend_y + 20 * static_cast<double>(k);
    out << "<line x1=\"" << legend_x << "\" y1=\"" << fmt(y) << "\" x2=\""
        << legend_x + 26 << "\" y2=\"" << fmt(y) << "\" stroke=\"" << kPalette[k % 6]
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << legend_x + 33 << "\" y=\"" << fmt(y + 4)
        << "\" font-family=\"sans-serif\" font-size=\"13\">"
        << detail::xml_escape(series[k].label) << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace ser
