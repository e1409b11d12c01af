// Copyright 2026 The Shaping Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace shaping::cli {

namespace {

constexpr double kWidth = 760.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 70.0;

const char* const kPalette[] = {"#1b6ca8", "#d1495b", "#66a182", "#edae49",
                                "#6c4f9c", "#3d3b30", "#8d6a9f", "#00798c"};

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string Escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* Color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

class Canvas {
 public:
  Canvas(double y_min, double y_max) : y_min_(y_min), y_max_(y_max) {
    if (!(y_max_ > y_min_)) y_max_ = y_min_ + 1.0;
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << Num(kWidth)
         << "\" height=\"" << Num(kHeight) << "\" viewBox=\"0 0 " << Num(kWidth)
         << ' ' << Num(kHeight) << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
         << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }

  double PlotW() const { return kWidth - kLeft - kRight; }
  double PlotH() const { return kHeight - kTop - kBottom; }
  double Y(double v) const {
    const double t = (std::clamp(v, y_min_, y_max_) - y_min_) / (y_max_ - y_min_);
    return kTop + PlotH() * (1.0 - t);
  }

  void Frame(const std::string& title, const std::string& x_label,
             const std::string& y_label) {
    Text(kWidth / 2.0 - kRight / 2.0, 22.0, title, "middle", 15);
    for (int i = 0; i <= 5; ++i) {
      const double v = y_min_ + (y_max_ - y_min_) * i / 5.0;
      const double y = Y(v);
      out_ << "<line x1=\"" << Num(kLeft) << "\" y1=\"" << Num(y) << "\" x2=\""
           << Num(kLeft + PlotW()) << "\" y2=\"" << Num(y)
           << "\" stroke=\"#dddddd\"/>\n";
      Text(kLeft - 6.0, y + 4.0, Num(v), "end", 11);
    }
    out_ << "<line x1=\"" << Num(kLeft) << "\" y1=\"" << Num(kTop) << "\" x2=\""
         << Num(kLeft) << "\" y2=\"" << Num(kTop + PlotH())
         << "\" stroke=\"black\"/>\n"
         << "<line x1=\"" << Num(kLeft) << "\" y1=\"" << Num(kTop + PlotH())
         << "\" x2=\"" << Num(kLeft + PlotW()) << "\" y2=\"" << Num(kTop + PlotH())
         << "\" stroke=\"black\"/>\n";
    if (!x_label.empty()) {
      Text(kLeft + PlotW() / 2.0, kHeight - 12.0, x_label, "middle", 12);
    }
    out_ << "<text transform=\"translate(16," << Num(kTop + PlotH() / 2.0)
         << ") rotate(-90)\" text-anchor=\"middle\">" << Escape(y_label)
         << "</text>\n";
  }

  void Legend(const std::vector<Series>& series) {
    const double x = kWidth - kRight + 14.0;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const double y = kTop + 10.0 + 20.0 * s;
      out_ << "<rect x=\"" << Num(x) << "\" y=\"" << Num(y - 9.0)
           << "\" width=\"12\" height=\"12\" fill=\"" << Color(s) << "\"/>\n";
      Text(x + 18.0, y + 1.0, series[s].label, "start", 12);
    }
  }

  void Text(double x, double y, const std::string& s, const char* anchor,
            int size) {
    out_ << "<text x=\"" << Num(x) << "\" y=\"" << Num(y) << "\" text-anchor=\""
         << anchor << "\" font-size=\"" << size << "\">" << Escape(s)
         << "</text>\n";
  }

  std::ostringstream& raw() { return out_; }

  std::string Finish() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  double y_min_;
  double y_max_;
  std::ostringstream out_;
};

double At(const std::vector<double>& v, std::size_t i) {
  return i < v.size() ? v[i] : std::nan("");
}

}  // namespace

std::string RenderBarChart(const BarChart& chart) {
  Canvas c(chart.y_min, chart.y_max);
  c.Frame(chart.title, "", chart.y_label);
  const std::size_t groups = std::max<std::size_t>(1, chart.groups.size());
  const double group_w = c.PlotW() / groups;
  const std::size_t ns = std::max<std::size_t>(1, chart.series.size());
  const double bar_w = group_w * 0.8 / ns;
  for (std::size_t g = 0; g < chart.groups.size(); ++g) {
    const double gx = kLeft + group_w * g;
    c.Text(gx + group_w / 2.0, kTop + c.PlotH() + 18.0, chart.groups[g],
           "middle", 11);
    for (std::size_t s = 0; s < chart.series.size(); ++s) {
      const double m = At(chart.series[s].mean, g);
      if (std::isnan(m)) continue;
      const double x = gx + group_w * 0.1 + bar_w * s;
      const double y = c.Y(m);
      c.raw() << "<rect x=\"" << Num(x) << "\" y=\"" << Num(y) << "\" width=\""
              << Num(bar_w * 0.92) << "\" height=\"" << Num(c.Y(chart.y_min) - y)
              << "\" fill=\"" << Color(s) << "\"/>\n";
      const double sd = At(chart.series[s].stddev, g);
      if (!std::isnan(sd) && sd > 0.0) {
        const double cx = x + bar_w * 0.46;
        c.raw() << "<line x1=\"" << Num(cx) << "\" y1=\"" << Num(c.Y(m - sd))
                << "\" x2=\"" << Num(cx) << "\" y2=\"" << Num(c.Y(m + sd))
                << "\" stroke=\"black\"/>\n";
      }
    }
  }
  c.Legend(chart.series);
  return c.Finish();
}

std::string RenderLineChart(const LineChart& chart) {
  Canvas c(chart.y_min, chart.y_max);
  c.Frame(chart.title, chart.x_label, chart.y_label);
  double x_min = 0.0, x_max = 1.0;
  if (!chart.x.empty()) {
    x_min = *std::min_element(chart.x.begin(), chart.x.end());
    x_max = *std::max_element(chart.x.begin(), chart.x.end());
  }
  if (!(x_max > x_min)) {
    x_min -= 0.5;
    x_max += 0.5;
  }
  auto px = [&](double x) {
    return kLeft + 10.0 + (c.PlotW() - 20.0) * (x - x_min) / (x_max - x_min);
  };
  for (double x : chart.x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    c.Text(px(x), kTop + c.PlotH() + 18.0, buf, "middle", 11);
  }
  for (std::size_t s = 0; s < chart.series.size(); ++s) {
    const Series& ser = chart.series[s];
    std::string upper, lower, line;
    for (std::size_t i = 0; i < chart.x.size(); ++i) {
      const double m = At(ser.mean, i);
      if (std::isnan(m)) continue;
      double sd = At(ser.stddev, i);
      if (std::isnan(sd)) sd = 0.0;
      const std::string x = Num(px(chart.x[i]));
      line += (line.empty() ? "" : " ") + x + "," + Num(c.Y(m));
      upper += (upper.empty() ? "" : " ") + x + "," + Num(c.Y(m + sd));
      lower = x + "," + Num(c.Y(m - sd)) + (lower.empty() ? "" : " ") + lower;
    }
    if (line.empty()) continue;
    c.raw() << "<polygon points=\"" << upper << ' ' << lower << "\" fill=\""
            << Color(s) << "\" fill-opacity=\"0.2\" stroke=\"none\"/>\n"
            << "<polyline points=\"" << line << "\" fill=\"none\" stroke=\""
            << Color(s) << "\" stroke-width=\"2\"/>\n";
  }
  c.Legend(chart.series);
  return c.Finish();
}

}  // namespace shaping::cli
