// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include "acmead/viz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iterator>

#include <fmt/format.h>

namespace acmead {

namespace {

std::string xml_escape(const std::string& s) {
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

std::string num(double v) { return fmt::format("{:.3f}", v); }

void open_svg(std::string& out, SvgSize size) {
  if (size.width < 200 || size.height < 150)
    throw UsageError(fmt::format("svg size {}x{} is too small (min 200x150)",
                                 size.width, size.height));
  fmt::format_to(std::back_inserter(out),
                 "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
                 "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
                 "width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
                 "font-family=\"sans-serif\" font-size=\"12\">\n"
                 "<rect x=\"0\" y=\"0\" width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n",
                 size.width, size.height);
}

// tab20-like palette; gray is reserved for `others`.
constexpr std::array<const char*, 18> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a",
    "#ff9896", "#c5b0d5", "#c49c94", "#f7b6d2", "#dbdb8d", "#9edae5"};
constexpr const char* kOthersColor = "#a0a0a0";

}  // namespace

std::string level_color(double level) {
  level = std::clamp(level, 0.0, 1.0);
  constexpr double from[3] = {33, 102, 172};
  constexpr double to[3] = {26, 152, 80};
  int c[3];
  for (int i = 0; i < 3; ++i)
    c[i] = static_cast<int>(std::lround(from[i] + level * (to[i] - from[i])));
  return fmt::format("rgb({},{},{})", c[0], c[1], c[2]);
}

std::string render_whatif(const LocalExplanation& e,
                          const std::vector<std::string>& names,
                          std::size_t top_k, SvgSize size) {
  const std::size_t d = e.point.size();
  if (top_k < 1 || top_k > d)
    throw UsageError(fmt::format("top_k must lie in [1, {}], got {}", d, top_k));
  if (names.size() != d) throw UsageError("feature name count does not match the explanation");

  const double left = 150.0, right = 30.0, top = 40.0, bottom = 50.0;
  const double plot_w = size.width - left - right;
  const double plot_h = size.height - top - bottom;
  const double row_h = plot_h / static_cast<double>(top_k);

  double lo = std::min(e.score, e.threshold), hi = std::max(e.score, e.threshold);
  for (std::size_t r = 0; r < top_k; ++r) {
    for (double s : e.curves[e.ranking[r]].scores) {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  double pad = 0.05 * (hi - lo);
  if (!(pad > 0.0)) pad = 0.5 * std::max(1e-3, std::abs(lo));
  lo -= pad;
  hi += pad;
  auto x_of = [&](double s) { return num(left + (s - lo) / (hi - lo) * plot_w); };
  auto y_of = [&](std::size_t r) { return num(top + (static_cast<double>(r) + 0.5) * row_h); };

  std::string out;
  open_svg(out, size);
  fmt::format_to(std::back_inserter(out),
                 "<text x=\"{}\" y=\"24\" font-size=\"14\">What-if: score {} ({}), "
                 "threshold {}</text>\n",
                 num(left), num(e.score), to_string(e.classification), num(e.threshold));

  // Axis with five ticks.
  const std::string axis_y = num(top + plot_h);
  fmt::format_to(std::back_inserter(out),
                 "<g class=\"axis\">\n<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" "
                 "stroke=\"#444\"/>\n",
                 num(left), axis_y, num(left + plot_w), axis_y);
  for (int t = 0; t <= 4; ++t) {
    const double v = lo + (hi - lo) * t / 4.0;
    fmt::format_to(std::back_inserter(out),
                   "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", x_of(v),
                   num(top + plot_h + 18.0), num(v));
  }
  fmt::format_to(std::back_inserter(out),
                 "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">anomaly score</text>\n"
                 "</g>\n",
                 num(left + plot_w / 2.0), num(top + plot_h + 38.0));

  fmt::format_to(std::back_inserter(out),
                 "<line class=\"threshold\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" "
                 "stroke=\"black\" stroke-width=\"2\"/>\n",
                 x_of(e.threshold), num(top), axis_y);
  const std::string score_x = x_of(e.score);
  fmt::format_to(std::back_inserter(out),
                 "<line class=\"score-line\" x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" "
                 "stroke=\"red\" stroke-width=\"2\" stroke-dasharray=\"6,4\"/>\n",
                 score_x, num(top), axis_y);

  for (std::size_t r = 0; r < top_k; ++r) {
    const std::size_t j = e.ranking[r];
    const std::string y = y_of(r);
    fmt::format_to(std::back_inserter(out),
                   "<g class=\"feature\" data-feature=\"{0}\">\n"
                   "<text class=\"feature-label\" x=\"{1}\" y=\"{2}\" text-anchor=\"end\" "
                   "dominant-baseline=\"middle\">{0}</text>\n",
                   xml_escape(names[j]), num(left - 10.0), y);
    const auto& curve = e.curves[j];
    for (std::size_t k = 0; k < curve.scores.size(); ++k) {
      fmt::format_to(std::back_inserter(out),
                     "<circle class=\"perturbation\" cx=\"{}\" cy=\"{}\" r=\"4\" "
                     "fill=\"{}\" fill-opacity=\"0.8\"/>\n",
                     x_of(curve.scores[k]), y, level_color(curve.levels[k]));
    }
    fmt::format_to(std::back_inserter(out),
                   "<circle class=\"point\" cx=\"{}\" cy=\"{}\" r=\"9\" fill=\"{}\" "
                   "stroke=\"#222\" stroke-width=\"1\"/>\n</g>\n",
                   score_x, y, level_color(e.point_levels[j]));
  }
  out += "</svg>\n";
  return out;
}

std::string render_rank_bars(const RankHistogram& hist, SvgSize size) {
  const std::size_t positions = hist.positions();
  const double legend_w = 170.0;
  const double left = 60.0, right = 20.0 + legend_w, top = 30.0, bottom = 50.0;
  const double plot_w = size.width - left - right;
  const double plot_h = size.height - top - bottom;
  const double slot = positions ? plot_w / static_cast<double>(positions) : plot_w;
  const double bar_w = 0.7 * slot;

  // `others` draws last and in gray; every other feature keeps its index color.
  std::vector<std::size_t> order;
  std::vector<std::string> colors(hist.features.size());
  std::size_t palette_at = 0;
  for (std::size_t j = 0; j < hist.features.size(); ++j) {
    if (hist.features[j] == kOthersName) {
      colors[j] = kOthersColor;
      continue;
    }
    colors[j] = kPalette[palette_at++ % kPalette.size()];
    order.push_back(j);
  }
  for (std::size_t j = 0; j < hist.features.size(); ++j) {
    if (hist.features[j] == kOthersName) order.push_back(j);
  }

  std::string out;
  open_svg(out, size);
  fmt::format_to(std::back_inserter(out),
                 "<text x=\"{}\" y=\"20\" font-size=\"14\">Overall importance "
                 "({} anomalies)</text>\n",
                 num(left), hist.n_anomalies);

  const std::string base_y = num(top + plot_h);
  out += "<g class=\"axis\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = top + plot_h * (1.0 - t / 4.0);
    fmt::format_to(std::back_inserter(out),
                   "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"#ddd\"/>\n"
                   "<text x=\"{3}\" y=\"{1}\" text-anchor=\"end\" "
                   "dominant-baseline=\"middle\">{4}%</text>\n",
                   num(left), num(y), num(left + plot_w), num(left - 6.0), t * 25);
  }
  for (std::size_t k = 0; k < positions; ++k) {
    fmt::format_to(std::back_inserter(out),
                   "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                   num(left + (static_cast<double>(k) + 0.5) * slot),
                   num(top + plot_h + 18.0), k + 1);
  }
  fmt::format_to(std::back_inserter(out),
                 "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">ranking position</text>\n"
                 "</g>\n",
                 num(left + plot_w / 2.0), num(top + plot_h + 38.0));

  for (std::size_t k = 0; k < positions; ++k) {
    const std::string x = num(left + static_cast<double>(k) * slot + (slot - bar_w) / 2.0);
    fmt::format_to(std::back_inserter(out), "<g class=\"bar\" data-position=\"{}\">\n", k + 1);
    double stacked = 0.0;
    for (std::size_t j : order) {
      const double share = hist.matrix[j][k];
      const double y0 = top + plot_h * (1.0 - stacked);
      const double y1 = top + plot_h * (1.0 - stacked - share);
      stacked += share;
      fmt::format_to(std::back_inserter(out),
                     "<rect class=\"segment\" data-feature=\"{}\" data-percent=\"{}\" "
                     "x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n",
                     xml_escape(hist.features[j]), num(100.0 * share), x, num(y1),
                     num(bar_w), num(y0 - y1), colors[j]);
    }
    out += "</g>\n";
  }

  out += "<g class=\"legend\">\n";
  const double lx = size.width - legend_w;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const std::size_t j = order[i];
    const double ly = top + 18.0 * static_cast<double>(i);
    fmt::format_to(std::back_inserter(out),
                   "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{}\"/>\n"
                   "<text class=\"legend-label\" x=\"{}\" y=\"{}\">{}</text>\n",
                   num(lx), num(ly), colors[j], num(lx + 18.0), num(ly + 10.0),
                   xml_escape(hist.features[j]));
  }
  out += "</g>\n</svg>\n";
  return out;
}

}  // namespace acmead
