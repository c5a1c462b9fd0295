// Copyright (c) 2026, the cocodist authors. All rights reserved.
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

#ifndef COCODIST_REPORT_HPP_
#define COCODIST_REPORT_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cocodist/distortions.hpp"
#include "cocodist/error.hpp"
#include "cocodist/eval.hpp"

namespace cocodist {

struct CellScore {
  DistortionKind kind = DistortionKind::kNoise;
  int level = 1;
  double map = 0.0;
  double ap50 = 0.0;
  double miou = 0.0;
  std::optional<double> rate;  // absent when the clean mAP is 0
};

struct GridCellRef {
  DistortionKind kind = DistortionKind::kNoise;
  int level = 1;
};

struct RobustnessReport {
  double clean_map = 0.0;
  double clean_ap50 = 0.0;
  double clean_miou = 0.0;
  std::vector<CellScore> cells;      // kind-major, level ascending
  std::vector<GridCellRef> missing;  // cells without a detections file
  std::vector<std::string> errors;
  std::optional<AggregateStats> stats;  // over the defined rates
};

inline nlohmann::json stats_to_json(const AggregateStats& s) {
  return nlohmann::json{
      {"mean", s.mean},
      {"median", s.median},
      {"q1", s.q1},
      {"q3", s.q3},
      {"p5", s.p5},
      {"p95", s.p95},
      {"histogram", nlohmann::json{{"max", s.histogram_max}, {"bins", s.histogram}}},
  };
}

inline AggregateStats stats_from_json(const nlohmann::json& j) {
  AggregateStats s;
  s.mean = j.at("mean").get<double>();
  s.median = j.at("median").get<double>();
  s.q1 = j.at("q1").get<double>();
  s.q3 = j.at("q3").get<double>();
  s.p5 = j.at("p5").get<double>();
  s.p95 = j.at("p95").get<double>();
  s.histogram_max = j.at("histogram").at("max").get<double>();
  const auto& bins = j.at("histogram").at("bins");
  if (bins.size() != s.histogram.size()) {
    throw ParseError("stats histogram must have " + std::to_string(s.histogram.size()) +
                     " bins");
  }
  for (std::size_t i = 0; i < s.histogram.size(); ++i) {
    s.histogram[i] = bins[i].get<std::int64_t>();
  }
  return s;
}

inline nlohmann::json report_to_json(const RobustnessReport& r) {
  nlohmann::json cells = nlohmann::json::array();
  for (const CellScore& c : r.cells) {
    nlohmann::json jc = {
        {"kind", std::string(kind_name(c.kind))},
        {"level", c.level},
        {"map", c.map},
        {"ap50", c.ap50},
        {"miou", c.miou},
        {"rate", nullptr},
    };
    if (c.rate) jc["rate"] = *c.rate;
    cells.push_back(std::move(jc));
  }
  nlohmann::json missing = nlohmann::json::array();
  for (const GridCellRef& m : r.missing) {
    missing.push_back(
        nlohmann::json{{"kind", std::string(kind_name(m.kind))}, {"level", m.level}});
  }
  return nlohmann::json{
      {"clean",
       nlohmann::json{{"map", r.clean_map}, {"ap50", r.clean_ap50}, {"miou", r.clean_miou}}},
      {"cells", std::move(cells)},
      {"missing", std::move(missing)},
      {"errors", r.errors},
      {"stats", r.stats ? stats_to_json(*r.stats) : nlohmann::json(nullptr)},
  };
}

inline DistortionKind parse_kind_or_throw(const std::string& name) {
  const auto kind = kind_from_name(name);
  if (!kind) throw ParseError("unknown distortion kind \"" + name + "\"");
  return *kind;
}

inline RobustnessReport report_from_json(const nlohmann::json& j) {
  RobustnessReport r;
  const auto& clean = j.at("clean");
  r.clean_map = clean.at("map").get<double>();
  r.clean_ap50 = clean.at("ap50").get<double>();
  r.clean_miou = clean.at("miou").get<double>();
  for (const auto& jc : j.at("cells")) {
    CellScore c;
    c.kind = parse_kind_or_throw(jc.at("kind").get<std::string>());
    c.level = jc.at("level").get<int>();
    c.map = jc.at("map").get<double>();
    c.ap50 = jc.at("ap50").get<double>();
    c.miou = jc.at("miou").get<double>();
    if (jc.contains("rate") && !jc.at("rate").is_null()) {
      c.rate = jc.at("rate").get<double>();
    }
    r.cells.push_back(c);
  }
  if (j.contains("missing")) {
    for (const auto& jm : j.at("missing")) {
      r.missing.push_back(GridCellRef{parse_kind_or_throw(jm.at("kind").get<std::string>()),
                                      jm.at("level").get<int>()});
    }
  }
  if (j.contains("errors")) {
    for (const auto& je : j.at("errors")) r.errors.push_back(je.get<std::string>());
  }
  if (j.contains("stats") && !j.at("stats").is_null()) {
    r.stats = stats_from_json(j.at("stats"));
  }
  return r;
}

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string fixed1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

}  // namespace detail

// Flat table, one row per scored cell, clean set first. The rate column is
// left empty when the clean mAP is 0 and rates are undefined.
inline std::string report_to_csv(const RobustnessReport& r) {
  std::string csv = "kind,level,mAP,AP50,mIoU,rate\n";
  const bool rates_defined = r.clean_map > 0.0;
  csv += "clean,0," + detail::fixed6(r.clean_map) + "," + detail::fixed6(r.clean_ap50) + "," +
         detail::fixed6(r.clean_miou) + "," + (rates_defined ? detail::fixed6(1.0) : "") + "\n";
  for (const CellScore& c : r.cells) {
    csv += std::string(kind_name(c.kind)) + "," + std::to_string(c.level) + "," +
           detail::fixed6(c.map) + "," + detail::fixed6(c.ap50) + "," + detail::fixed6(c.miou) +
           "," + (c.rate ? detail::fixed6(*c.rate) : "") + "\n";
  }
  return csv;
}

// Score-versus-level line chart for one kind: mAP and AP50 polylines over
// levels 0..10, the clean scores plotted at level 0.
inline std::string render_kind_chart_svg(const RobustnessReport& r, DistortionKind kind) {
  constexpr double kWidth = 640, kHeight = 400;
  constexpr double kLeft = 60, kRight = 620, kTop = 45, kBottom = 350;
  const auto x_of = [&](int level) {
    return kLeft + (kRight - kLeft) * level / 10.0;
  };
  const auto y_of = [&](double score) {
    return kBottom - (kBottom - kTop) * std::min(1.0, std::max(0.0, score));
  };

  std::vector<std::pair<int, const CellScore*>> points;
  for (const CellScore& c : r.cells) {
    if (c.kind == kind) points.emplace_back(c.level, &c);
  }
  std::sort(points.begin(), points.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
         "viewBox=\"0 0 640 400\">\n";
  svg += "<rect x=\"0\" y=\"0\" width=\"640\" height=\"400\" fill=\"white\"/>\n";
  svg += "<text x=\"320\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" +
         std::string(kind_name(kind)) + "</text>\n";

  for (int i = 0; i <= 10; i += 2) {
    const double gy = y_of(i / 10.0);
    svg += "<line x1=\"" + detail::fixed1(kLeft) + "\" y1=\"" + detail::fixed1(gy) + "\" x2=\"" +
           detail::fixed1(kRight) + "\" y2=\"" + detail::fixed1(gy) +
           "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::fixed1(kLeft - 8) + "\" y=\"" + detail::fixed1(gy + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
           detail::fixed1(i / 10.0) + "</text>\n";
  }
  for (int level = 0; level <= 10; ++level) {
    const double gx = x_of(level);
    svg += "<line x1=\"" + detail::fixed1(gx) + "\" y1=\"" + detail::fixed1(kBottom) +
           "\" x2=\"" + detail::fixed1(gx) + "\" y2=\"" + detail::fixed1(kBottom + 5) +
           "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::fixed1(gx) + "\" y=\"" + detail::fixed1(kBottom + 20) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
           std::to_string(level) + "</text>\n";
  }
  svg += "<line x1=\"" + detail::fixed1(kLeft) + "\" y1=\"" + detail::fixed1(kTop) + "\" x2=\"" +
         detail::fixed1(kLeft) + "\" y2=\"" + detail::fixed1(kBottom) +
         "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "<line x1=\"" + detail::fixed1(kLeft) + "\" y1=\"" + detail::fixed1(kBottom) +
         "\" x2=\"" + detail::fixed1(kRight) + "\" y2=\"" + detail::fixed1(kBottom) +
         "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  svg += "<text x=\"340\" y=\"390\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">level</text>\n";

  struct Series {
    const char* label;
    const char* color;
    double clean;
    double CellScore::*field;
  };
  const Series series[] = {
      {"mAP", "#1f6fb4", r.clean_map, &CellScore::map},
      {"AP50", "#d97826", r.clean_ap50, &CellScore::ap50},
  };
  double legend_x = kLeft + 10;
  for (const Series& s : series) {
    std::string poly = detail::fixed1(x_of(0)) + "," + detail::fixed1(y_of(s.clean));
    for (const auto& [level, cell] : points) {
      poly += " " + detail::fixed1(x_of(level)) + "," + detail::fixed1(y_of(cell->*s.field));
    }
    svg += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" + s.color +
           "\" stroke-width=\"2\"/>\n";
    svg += "<circle cx=\"" + detail::fixed1(x_of(0)) + "\" cy=\"" + detail::fixed1(y_of(s.clean)) +
           "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
    for (const auto& [level, cell] : points) {
      svg += "<circle cx=\"" + detail::fixed1(x_of(level)) + "\" cy=\"" +
             detail::fixed1(y_of(cell->*s.field)) + "\" r=\"3\" fill=\"" + s.color + "\"/>\n";
    }
    svg += "<rect x=\"" + detail::fixed1(legend_x) + "\" y=\"52\" width=\"12\" height=\"4\" "
           "fill=\"" + s.color + "\"/>\n";
    svg += "<text x=\"" + detail::fixed1(legend_x + 18) +
           "\" y=\"58\" font-family=\"sans-serif\" font-size=\"11\">" + s.label + "</text>\n";
    legend_x += 70;
  }
  svg += "</svg>\n";
  return svg;
}

// Distribution summary of the defined robustness rates, shaped for
// violin-style consumers.
inline nlohmann::json violin_summary_json(const RobustnessReport& r) {
  std::vector<double> rates;
  for (const CellScore& c : r.cells) {
    if (c.rate) rates.push_back(*c.rate);
  }
  if (rates.empty()) {
    return nlohmann::json{{"count", 0}, {"stats", nullptr}};
  }
  return nlohmann::json{{"count", rates.size()}, {"stats", stats_to_json(aggregate_stats(rates))}};
}

}  // namespace cocodist

#endif  // COCODIST_REPORT_HPP_
