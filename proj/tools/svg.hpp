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

#ifndef SHAPING_TOOLS_SVG_HPP_
#define SHAPING_TOOLS_SVG_HPP_

#include <string>
#include <vector>

namespace shaping::cli {

// One labelled series; NaN entries are skipped.
struct Series {
  std::string label;
  std::vector<double> mean;
  std::vector<double> stddev;
};

// Grouped bars with +-std whiskers. series[s].mean[g] is the bar of
// series s in group g.
struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> groups;
  std::vector<Series> series;
  double y_min = 0.0;
  double y_max = 1.0;
};

// Mean lines over numeric x with shaded +-std bands.
struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<Series> series;
  double y_min = 0.0;
  double y_max = 1.0;
};

std::string RenderBarChart(const BarChart& chart);
std::string RenderLineChart(const LineChart& chart);

}  // namespace shaping::cli

#endif  // SHAPING_TOOLS_SVG_HPP_
