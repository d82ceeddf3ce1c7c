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

#include "agreerm/plots.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <unistd.h>

#include "agreerm/error.h"
#include "doctest.h"

using namespace agreerm;
namespace fs = std::filesystem;

namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

// The text of the series group named `name`.
std::string series_group(const std::string& svg, const std::string& name) {
  const std::size_t start = svg.find("<g class=\"series\" data-name=\"" + name + "\">");
  REQUIRE(start != std::string::npos);
  return svg.substr(start, svg.find("</g>", start) - start);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

LineChart golden_chart() {
  LineChart chart;
  chart.title = "Test accuracy";
  chart.x_label = "step";
  chart.y_label = "accuracy";
  chart.comment = "config_hash=0,corpus_hash=0,seed=1,tool_version=0.1.0";
  chart.series = {{"max", {{0, 0.5}, {100, 0.6}, {200, 0.65}}},
                  {"min", {{0, 0.5}, {100, 0.52}, {200, 0.55}}},
                  {"dist", {{0, 0.5}, {100, 0.62}, {200, 0.66}}},
                  {"rand", {{0, 0.5}, {100, 0.61}, {200, 0.64}}}};
  return chart;
}

}  // namespace

TEST_CASE("single-point series gets a marker and no line") {
  LineChart chart;
  chart.title = "one";
  chart.series = {{"solo", {{1.0, 2.0}}}, {"pair", {{0.0, 0.0}, {1.0, 1.0}}}};
  const std::string svg = render_line_chart(chart);
  const std::string solo = series_group(svg, "solo");
  CHECK(count(solo, "<polyline") == 0);
  CHECK(count(solo, "<circle") == 1);
  CHECK(count(series_group(svg, "pair"), "<polyline") == 1);
}

TEST_CASE("four series are distinguishable and listed in the legend") {
  const std::string svg = render_line_chart(golden_chart());
  CHECK(svg.rfind("<?xml", 0) == 0);
  CHECK(svg.find("<!-- config_hash=0,corpus_hash=0,seed=1,tool_version=0.1.0 -->") != std::string::npos);
  CHECK(count(svg, "<g class=\"legend\">") == 1);
  std::set<std::string> styles;
  for (const char* name : {"max", "min", "dist", "rand"}) {
    const std::string g = series_group(svg, name);
    const std::size_t stroke = g.find("stroke=\"");
    REQUIRE(stroke != std::string::npos);
    const std::size_t dash = g.find("stroke-dasharray=\"");
    styles.insert(g.substr(stroke, 16) + (dash == std::string::npos ? "solid" : g.substr(dash, 24)));
    CHECK(svg.find(">" + std::string(name) + "</text>") != std::string::npos);
  }
  CHECK(styles.size() == 4);
  CHECK(count(svg, "<svg") == count(svg, "</svg>"));
}

TEST_CASE("line chart matches the stored golden file") {
  const std::string golden = slurp(fs::path(AGREERM_TEST_DATA) / "golden_line.svg");
  REQUIRE_FALSE(golden.empty());
  CHECK(render_line_chart(golden_chart()) == golden);
}

TEST_CASE("bar chart skips NaN bars") {
  BarChart chart;
  chart.title = "tau";
  chart.groups = {"coherence", "consistency"};
  chart.series = {{"max", {{0, 0.3}, {1, NAN}}}, {"min", {{0, -0.1}, {1, 0.2}}}};
  const std::string svg = render_bar_chart(chart);
  CHECK(count(series_group(svg, "max"), "<rect") == 1);
  CHECK(count(series_group(svg, "min"), "<rect") == 2);
  CHECK(svg.find("coherence") != std::string::npos);
}

TEST_CASE("text is escaped") {
  LineChart chart;
  chart.title = "a < b & \"c\"";
  chart.series = {{"x<y", {{0, 1}, {1, 2}}}};
  chart.comment = "no -- double dashes";
  const std::string svg = render_line_chart(chart);
  CHECK(svg.find("a &lt; b &amp;") != std::string::npos);
  CHECK(svg.find("data-name=\"x&lt;y\"") != std::string::npos);
  CHECK(count(svg, "--") == 2);  // only the comment delimiters
}

TEST_CASE("render_plots reads the combined CSVs") {
  const fs::path dir = fs::temp_directory_path() / ("agreerm_plots_test_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string prov = "# config_hash=1,corpus_hash=2,seed=3,tool_version=0.1.0\n";
  std::ofstream(dir / "combined_accuracy.csv") << prov << "step,max,rand\n0,0.5,0.5\n10,0.6,0.55\n";
  std::ofstream(dir / "combined_rlhf.csv")
      << prov << "strategy,update,mean_reward,rouge1_f1,rouge2_f1,rougeL_f1\n"
      << "max,0,1.0,0.2,0.1,0.2\nmax,1,1.2,0.25,0.1,0.22\nrand,0,1.0,0.2,0.1,0.2\n";
  CHECK_THROWS_WITH_AS(render_plots(dir.string()), doctest::Contains("missing CSV"), Error);
  std::ofstream(dir / "combined_correlation.csv")
      << prov << "scorer,level,coherence,consistency,fluency,relevance\n"
      << "max,summary,0.1,0.2,nan,0.3\nmax,system,0.5,0.5,0.5,0.5\nrouge-1,summary,0.0,0.1,0.1,0.2\n";

  const std::vector<std::string> written = render_plots(dir.string(), (dir / "svg").string());
  CHECK(written.size() == 6);
  for (const char* name : {"accuracy.svg", "reward.svg", "rouge1.svg", "rouge2.svg", "rougeL.svg",
                           "correlation.svg"}) {
    const std::string svg = slurp(dir / "svg" / name);
    CHECK_MESSAGE(svg.find("<!-- config_hash=1,corpus_hash=2,seed=3") != std::string::npos, name);
  }
  // rand has one RLHF point: marker only.
  CHECK(count(series_group(slurp(dir / "svg/reward.svg"), "rand"), "<polyline") == 0);
  CHECK(slurp(dir / "svg/correlation.svg").find("rouge-1") != std::string::npos);
  fs::remove_all(dir);
}
