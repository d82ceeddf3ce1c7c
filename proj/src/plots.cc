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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "agreerm/error.h"

namespace agreerm {
namespace {

namespace fs = std::filesystem;

constexpr double kWidth = 720, kHeight = 420;
constexpr double kLeft = 70, kRight = 160, kTop = 44, kBottom = 56;

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};
constexpr const char* kDashes[] = {"", "6,3", "2,3", "8,3,2,3"};
constexpr const char* kMarkers[] = {"circle", "square", "diamond", "triangle"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
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

// XML comments may not contain "--".
std::string comment_text(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '-' && !out.empty() && out.back() == '-') out += ' ';
    out += c;
  }
  return out;
}

struct Range {
  double lo = 0, hi = 1;
};

Range padded(double lo, double hi) {
  if (!(lo <= hi)) return {0, 1};
  if (hi - lo < 1e-12) {
    const double pad = std::abs(lo) > 1e-12 ? std::abs(lo) * 0.1 : 0.5;
    return {lo - pad, hi + pad};
  }
  return {lo, hi};
}

double nice_step(double span) {
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  return (f <= 1 ? 1 : f <= 2 ? 2 : f <= 5 ? 5 : 10) * mag;
}

std::vector<double> ticks(Range& r) {
  const double step = nice_step(r.hi - r.lo);
  r.lo = std::floor(r.lo / step + 1e-9) * step;
  r.hi = std::ceil(r.hi / step - 1e-9) * step;
  std::vector<double> out;
  for (double t = r.lo; t <= r.hi + step * 1e-6; t += step) out.push_back(t);
  return out;
}

void open_svg(std::ostringstream& out, const std::string& comment, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) out << "<!-- " << comment_text(comment) << " -->\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(title) << "</text>\n";
}

void marker(std::ostringstream& out, std::size_t style, double x, double y, const char* color) {
  switch (style % 4) {
    case 0:
      out << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"3.5\" fill=\"" << color
          << "\"/>\n";
      break;
    case 1:
      out << "<rect x=\"" << num(x - 3.5) << "\" y=\"" << num(y - 3.5)
          << "\" width=\"7\" height=\"7\" fill=\"" << color << "\"/>\n";
      break;
    case 2:
      out << "<polygon points=\"" << num(x) << ',' << num(y - 4.5) << ' ' << num(x + 4.5) << ','
          << num(y) << ' ' << num(x) << ',' << num(y + 4.5) << ' ' << num(x - 4.5) << ','
          << num(y) << "\" fill=\"" << color << "\"/>\n";
      break;
    default:
      out << "<polygon points=\"" << num(x) << ',' << num(y - 4.5) << ' ' << num(x + 4.5) << ','
          << num(y + 3.5) << ' ' << num(x - 4.5) << ',' << num(y + 3.5) << "\" fill=\"" << color
          << "\"/>\n";
  }
}

void axes(std::ostringstream& out, const Range& xr, const std::vector<double>& xt,
          const Range& yr, const std::vector<double>& yt, const std::string& x_label,
          const std::string& y_label) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  for (double t : yt) {
    const double y = y0 - (t - yr.lo) / (yr.hi - yr.lo) * (y0 - y1);
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x1) << "\" y2=\""
        << num(y) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
        << tick_label(t) << "</text>\n";
  }
  for (double t : xt) {
    const double x = x0 + (t - xr.lo) / (xr.hi - xr.lo) * (x1 - x0);
    out << "<line x1=\"" << num(x) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(y0 + 5) << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << num(x) << "\" y=\"" << num(y0 + 18) << "\" text-anchor=\"middle\">"
        << tick_label(t) << "</text>\n";
  }
  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\""
      << num(y0) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0) << "\" y2=\""
      << num(y1) << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 14)
      << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  out << "<text x=\"18\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << num((y0 + y1) / 2) << ")\">" << escape(y_label) << "</text>\n";
}

void legend(std::ostringstream& out, const std::vector<PlotSeries>& series, bool lines) {
  const double x = kWidth - kRight + 16;
  double y = kTop + 10;
  out << "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i, y += 20) {
    const char* color = kColors[i % 8];
    if (lines) {
      out << "<line x1=\"" << num(x) << "\" y1=\"" << num(y) << "\" x2=\"" << num(x + 24)
          << "\" y2=\"" << num(y) << "\" stroke=\"" << color << "\" stroke-width=\"2\"";
      if (*kDashes[i % 4]) out << " stroke-dasharray=\"" << kDashes[i % 4] << '"';
      out << "/>\n";
      marker(out, i, x + 12, y, color);
    } else {
      out << "<rect x=\"" << num(x + 4) << "\" y=\"" << num(y - 6) << "\" width=\"16\" height=\"12\" fill=\""
          << color << "\"/>\n";
    }
    out << "<text x=\"" << num(x + 30) << "\" y=\"" << num(y + 4) << "\">" << escape(series[i].name)
        << "</text>\n";
  }
  out << "</g>\n";
}

// Minimal reader for the combined CSVs: '#' lines skipped, first row is the
// header, no quoting.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string provenance;

  std::size_t column(const std::string& name, const std::string& path) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw Error(path + ": missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out(1);
  for (char c : line) {
    if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

Table read_table(const fs::path& path) {
  if (!fs::exists(path)) throw Error("missing CSV '" + path.string() + "'");
  std::ifstream in(path);
  if (!in) throw Error("cannot open CSV '" + path.string() + "'");
  Table t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (t.provenance.empty()) t.provenance = line.substr(line.find_first_not_of("# "));
      continue;
    }
    if (t.header.empty()) {
      t.header = split_csv(line);
    } else {
      t.rows.push_back(split_csv(line));
      if (t.rows.back().size() != t.header.size()) {
        throw Error(path.string() + ": row width does not match the header");
      }
    }
  }
  if (t.header.empty()) throw Error(path.string() + ": no header row");
  return t;
}

double cell(const std::string& s, const fs::path& path) {
  if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw Error(path.string() + ": bad number '" + s + "'");
  return v;
}

void write_svg(const fs::path& path, const std::string& svg, std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << svg;
  if (!out) throw Error("write failed for '" + path.string() + "'");
  written.push_back(path.string());
}

}  // namespace

std::string render_line_chart(const LineChart& chart) {
  double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
  for (const PlotSeries& s : chart.series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      xlo = std::min(xlo, x);
      xhi = std::max(xhi, x);
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  Range xr = padded(xlo, xhi), yr = padded(ylo, yhi);
  const std::vector<double> xt = ticks(xr), yt = ticks(yr);

  std::ostringstream out;
  open_svg(out, chart.comment, chart.title);
  axes(out, xr, xt, yr, yt, chart.x_label, chart.y_label);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const auto px = [&](double x) { return x0 + (x - xr.lo) / (xr.hi - xr.lo) * (x1 - x0); };
  const auto py = [&](double y) { return y0 - (y - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };

  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const char* color = kColors[i % 8];
    std::vector<std::pair<double, double>> pts;
    for (auto [x, y] : chart.series[i].points) {
      if (std::isfinite(x) && std::isfinite(y)) pts.emplace_back(px(x), py(y));
    }
    out << "<g class=\"series\" data-name=\"" << escape(chart.series[i].name) << "\">\n";
    if (pts.size() >= 2) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"";
      if (*kDashes[i % 4]) out << " stroke-dasharray=\"" << kDashes[i % 4] << '"';
      out << " points=\"";
      for (std::size_t k = 0; k < pts.size(); ++k) {
        out << (k ? " " : "") << num(pts[k].first) << ',' << num(pts[k].second);
      }
      out << "\"/>\n";
    }
    // Markers on every point when sparse, otherwise only at the ends.
    for (std::size_t k = 0; k < pts.size(); ++k) {
      if (pts.size() <= 30 || k == 0 || k + 1 == pts.size()) {
        marker(out, i, pts[k].first, pts[k].second, color);
      }
    }
    out << "</g>\n";
  }
  legend(out, chart.series, true);
  out << "</svg>\n";
  return out.str();
}

std::string render_bar_chart(const BarChart& chart) {
  double ylo = 0.0, yhi = 0.0;
  for (const PlotSeries& s : chart.series) {
    for (auto [x, y] : s.points) {
      if (!std::isfinite(y)) continue;
      ylo = std::min(ylo, y);
      yhi = std::max(yhi, y);
    }
  }
  Range yr = padded(ylo, yhi);
  const std::vector<double> yt = ticks(yr);

  std::ostringstream out;
  open_svg(out, chart.comment, chart.title);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  const auto py = [&](double y) { return y0 - (y - yr.lo) / (yr.hi - yr.lo) * (y0 - y1); };
  for (double t : yt) {
    out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(x1)
        << "\" y2=\"" << num(py(t)) << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(py(t) + 4) << "\" text-anchor=\"end\">"
        << tick_label(t) << "</text>\n";
  }
  const std::size_t g = std::max<std::size_t>(chart.groups.size(), 1);
  const std::size_t s = std::max<std::size_t>(chart.series.size(), 1);
  const double group_w = (x1 - x0) / static_cast<double>(g);
  const double bar_w = group_w * 0.8 / static_cast<double>(s);
  for (std::size_t gi = 0; gi < chart.groups.size(); ++gi) {
    const double gx = x0 + group_w * static_cast<double>(gi);
    out << "<text x=\"" << num(gx + group_w / 2) << "\" y=\"" << num(y0 + 18)
        << "\" text-anchor=\"middle\">" << escape(chart.groups[gi]) << "</text>\n";
  }
  for (std::size_t si = 0; si < chart.series.size(); ++si) {
    const auto& pts = chart.series[si].points;
    out << "<g class=\"series\" data-name=\"" << escape(chart.series[si].name) << "\">\n";
    for (std::size_t gi = 0; gi < chart.groups.size() && gi < pts.size(); ++gi) {
      const double v = pts[gi].second;
      if (!std::isfinite(v)) continue;
      const double bx = x0 + group_w * (static_cast<double>(gi) + 0.1) + bar_w * static_cast<double>(si);
      const double top = py(std::max(v, 0.0)), bottom = py(std::min(v, 0.0));
      out << "<rect x=\"" << num(bx) << "\" y=\"" << num(top) << "\" width=\"" << num(bar_w)
          << "\" height=\"" << num(bottom - top) << "\" fill=\"" << kColors[si % 8] << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(py(0)) << "\" x2=\"" << num(x1) << "\" y2=\""
      << num(py(0)) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0) << "\" y2=\""
      << num(y1) << "\" stroke=\"black\"/>\n";
  out << "<text x=\"18\" y=\"" << num((y0 + y1) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << num((y0 + y1) / 2) << ")\">"
      << escape(chart.y_label) << "</text>\n";
  legend(out, chart.series, false);
  out << "</svg>\n";
  return out.str();
}

std::vector<std::string> render_plots(const std::string& report_dir, const std::string& out_dir) {
  const fs::path in(report_dir);
  const fs::path out = out_dir.empty() ? in : fs::path(out_dir);
  const fs::path acc_path = in / "combined_accuracy.csv";
  const fs::path rl_path = in / "combined_rlhf.csv";
  const fs::path corr_path = in / "combined_correlation.csv";
  const Table acc = read_table(acc_path);
  const Table rl = read_table(rl_path);
  const Table corr = read_table(corr_path);
  fs::create_directories(out);
  std::vector<std::string> written;

  {
    LineChart chart{"Held-out accuracy", "training step", "accuracy", {}, acc.provenance};
    for (std::size_t c = 1; c < acc.header.size(); ++c) {
      PlotSeries s{acc.header[c], {}};
      for (const auto& row : acc.rows) {
        const double y = cell(row[c], acc_path);
        if (!std::isnan(y)) s.points.emplace_back(cell(row[0], acc_path), y);
      }
      chart.series.push_back(std::move(s));
    }
    write_svg(out / "accuracy.svg", render_line_chart(chart), written);
  }

  {
    const std::size_t strategy = rl.column("strategy", rl_path.string());
    const std::size_t update = rl.column("update", rl_path.string());
    const std::pair<const char*, const char*> metrics[] = {
        {"mean_reward", "reward"}, {"rouge1_f1", "rouge1"},
        {"rouge2_f1", "rouge2"}, {"rougeL_f1", "rougeL"}};
    for (const auto& [column, file] : metrics) {
      const std::size_t c = rl.column(column, rl_path.string());
      LineChart chart{std::string(column) + " over RLHF updates", "update", column, {},
                      rl.provenance};
      std::map<std::string, std::size_t> slot;
      for (const auto& row : rl.rows) {
        auto [it, inserted] = slot.emplace(row[strategy], chart.series.size());
        if (inserted) chart.series.push_back({row[strategy], {}});
        chart.series[it->second].points.emplace_back(cell(row[update], rl_path),
                                                      cell(row[c], rl_path));
      }
      write_svg(out / (std::string(file) + ".svg"), render_line_chart(chart), written);
    }
  }

  {
    const std::size_t scorer = corr.column("scorer", corr_path.string());
    const std::size_t level = corr.column("level", corr_path.string());
    BarChart chart{"Summary-level Kendall tau with quality ratings", "tau",
                   {"coherence", "consistency", "fluency", "relevance"}, {}, corr.provenance};
    std::vector<std::size_t> cols;
    for (const std::string& g : chart.groups) cols.push_back(corr.column(g, corr_path.string()));
    for (const auto& row : corr.rows) {
      if (row[level] != "summary") continue;
      PlotSeries s{row[scorer], {}};
      for (std::size_t k = 0; k < cols.size(); ++k) {
        s.points.emplace_back(static_cast<double>(k), cell(row[cols[k]], corr_path));
      }
      chart.series.push_back(std::move(s));
    }
    write_svg(out / "correlation.svg", render_bar_chart(chart), written);
  }
  return written;
}

}  // namespace agreerm
