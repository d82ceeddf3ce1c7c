// Copyright 2026 The agreerm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef AGREERM_PLOTS_H_
#define AGREERM_PLOTS_H_

#include <string>
#include <utility>
#include <vector>

namespace agreerm {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;  // (x, y), drawn in order
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  std::string comment;  // emitted as an XML comment when non-empty
};

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> groups;  // x-axis categories
  std::vector<PlotSeries> series;   // points[i].second is the bar for groups[i]; NaN skips
  std::string comment;
};

// Self-contained SVG. A series with one point gets a marker and no line.
std::string render_line_chart(const LineChart& chart);
std::string render_bar_chart(const BarChart& chart);

// Reads combined_accuracy.csv, combined_rlhf.csv and combined_correlation.csv
// from report_dir and writes accuracy.svg, reward.svg, rouge1.svg,
// rouge2.svg, rougeL.svg and correlation.svg to out_dir (report_dir when
// empty). Returns the written paths. A missing CSV is an error.
std::vector<std::string> render_plots(const std::string& report_dir,
                                      const std::string& out_dir = "");

}  // namespace agreerm

#endif  // AGREERM_PLOTS_H_
