// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include "acmead/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

namespace acmead {

Dataset::Dataset(std::vector<std::string> feature_names,
                 std::vector<double> values,
                 std::optional<std::vector<int>> labels)
    : names_(std::move(feature_names)),
      values_(std::move(values)),
      labels_(std::move(labels)) {
  if (names_.empty()) throw DataError("dataset has no features");
  if (values_.size() % names_.size() != 0)
    throw DataError("dataset values do not fill whole rows");
  n_ = values_.size() / names_.size();
  if (n_ == 0) throw DataError("dataset has no rows");

  std::unordered_set<std::string> seen;
  for (const auto& name : names_) {
    if (!seen.insert(name).second)
      throw DataError(fmt::format("duplicate feature name '{}'", name));
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k]))
      throw DataError(fmt::format("non-finite value at row {}, column {}",
                                  k / dims(), k % dims()));
  }
  if (labels_) {
    if (labels_->size() != n_)
      throw DataError("label count does not match row count");
    for (int label : *labels_) {
      if (label != 0 && label != 1)
        throw DataError(fmt::format("label must be 0 or 1, got {}", label));
    }
  }
}

std::vector<double> Dataset::column(std::size_t j) const {
  std::vector<double> out(n_);
  for (std::size_t i = 0; i < n_; ++i) out[i] = at(i, j);
  return out;
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  std::vector<double> values;
  values.reserve(indices.size() * dims());
  std::optional<std::vector<int>> labels;
  if (labels_) labels.emplace().reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= n_) throw DataError(fmt::format("row {} out of range", i));
    auto r = row(i);
    values.insert(values.end(), r.begin(), r.end());
    if (labels) labels->push_back((*labels_)[i]);
  }
  return Dataset(names_, std::move(values), std::move(labels));
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

double parse_cell(std::string_view cell, std::size_t row, std::size_t col) {
  std::string_view digits = cell;
  if (!digits.empty() && digits.front() == '+') digits.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != digits.data() + digits.size())
    throw DataError(fmt::format("non-numeric cell '{}' at row {}, column {}",
                                cell, row, col));
  if (!std::isfinite(v))
    throw DataError(fmt::format("non-finite cell '{}' at row {}, column {}",
                                cell, row, col));
  return v;
}

}  // namespace

Dataset parse_csv(const std::string& text, LabelColumn labels) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw DataError("csv is empty: missing header");
  std::vector<std::string> header;
  for (auto cell : split(line)) header.emplace_back(cell);

  bool has_labels = labels == LabelColumn::present ||
                    (labels == LabelColumn::detect && header.back() == "label");
  if (has_labels && header.size() < 2)
    throw DataError("csv has a label column but no features");
  const std::size_t width = header.size();
  const std::size_t d = has_labels ? width - 1 : width;
  header.resize(d);

  std::vector<double> values;
  std::vector<int> label_values;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (cells.size() != width)
      throw DataError(fmt::format("row {} has {} cells, expected {}", row,
                                  cells.size(), width));
    for (std::size_t c = 0; c < d; ++c)
      values.push_back(parse_cell(cells[c], row, c));
    if (has_labels) {
      double l = parse_cell(cells[d], row, d);
      if (l != 0.0 && l != 1.0)
        throw DataError(fmt::format("label at row {} must be 0 or 1", row));
      label_values.push_back(static_cast<int>(l));
    }
    ++row;
  }
  if (row == 0) throw DataError("csv has no data rows");
  std::optional<std::vector<int>> lab;
  if (has_labels) lab = std::move(label_values);
  return Dataset(std::move(header), std::move(values), std::move(lab));
}

Dataset load_csv(const std::filesystem::path& path, LabelColumn labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), labels);
}

std::string to_csv(const Dataset& data) {
  std::string out;
  const auto& names = data.feature_names();
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (j) out += ',';
    out += names[j];
  }
  if (data.labels()) out += ",label";
  out += '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < data.dims(); ++j) {
      if (j) out += ',';
      fmt::format_to(std::back_inserter(out), "{}", data.at(i, j));
    }
    if (data.labels()) fmt::format_to(std::back_inserter(out), ",{}", (*data.labels())[i]);
    out += '\n';
  }
  return out;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << to_csv(data);
}

double interpolated_quantile(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw DataError("quantile of an empty sample");
  p = std::clamp(p, 0.0, 1.0);
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

QuantileGrid::QuantileGrid(std::vector<double> levels,
                           std::vector<std::vector<double>> values)
    : levels_(std::move(levels)), values_(std::move(values)) {
  if (levels_.size() < 2) throw UsageError("quantile grid needs >= 2 levels");
  if (levels_.front() != 0.0 || levels_.back() != 1.0)
    throw UsageError("quantile levels must span [0, 1]");
  for (std::size_t k = 1; k < levels_.size(); ++k) {
    if (!(levels_[k] > levels_[k - 1]))
      throw UsageError("quantile levels must be strictly increasing");
  }
  for (const auto& row : values_) {
    if (row.size() != levels_.size())
      throw UsageError("quantile row length differs from level count");
    if (!std::is_sorted(row.begin(), row.end()))
      throw UsageError("quantile values must be non-decreasing");
  }
}

double QuantileGrid::level_of(std::size_t j, double v) const {
  const auto& q = values_.at(j);
  if (v < q.front()) return 0.0;
  if (v > q.back()) return 1.0;
  // [first, last) is the run of grid points equal to v.
  auto first = std::lower_bound(q.begin(), q.end(), v);
  auto last = std::upper_bound(q.begin(), q.end(), v);
  if (first != last) {
    const auto a = static_cast<std::size_t>(first - q.begin());
    const auto b = static_cast<std::size_t>(last - q.begin()) - 1;
    return 0.5 * (levels_[a] + levels_[b]);
  }
  const auto hi = static_cast<std::size_t>(first - q.begin());
  const std::size_t lo = hi - 1;
  const double t = (v - q[lo]) / (q[hi] - q[lo]);
  return std::clamp(levels_[lo] + t * (levels_[hi] - levels_[lo]), 0.0, 1.0);
}

double QuantileGrid::value_at(std::size_t j, double level) const {
  const auto& q = values_.at(j);
  level = std::clamp(level, 0.0, 1.0);
  auto it = std::upper_bound(levels_.begin(), levels_.end(), level);
  if (it == levels_.end()) return q.back();
  const auto hi = static_cast<std::size_t>(it - levels_.begin());
  const std::size_t lo = hi - 1;
  const double t = (level - levels_[lo]) / (levels_[hi] - levels_[lo]);
  return q[lo] + t * (q[hi] - q[lo]);
}

QuantileGrid build_quantile_grid(const Dataset& data, std::size_t levels) {
  if (levels < 2)
    throw UsageError(fmt::format("quantile levels must be >= 2, got {}", levels));
  std::vector<double> probs(levels);
  for (std::size_t k = 0; k < levels; ++k)
    probs[k] = static_cast<double>(k) / static_cast<double>(levels - 1);
  probs.back() = 1.0;

  std::vector<std::vector<double>> values(data.dims());
  for (std::size_t j = 0; j < data.dims(); ++j) {
    auto col = data.column(j);
    std::sort(col.begin(), col.end());
    values[j].resize(levels);
    for (std::size_t k = 0; k < levels; ++k)
      values[j][k] = interpolated_quantile(col, probs[k]);
  }
  return QuantileGrid(std::move(probs), std::move(values));
}

const char* to_string(Classification c) noexcept {
  return c == Classification::anomalous ? "anomalous" : "normal";
}

double fit_threshold(std::span<const double> train_scores,
                     double contamination) {
  if (train_scores.empty()) throw UsageError("cannot fit a threshold on no scores");
  if (!(contamination > 0.0 && contamination < 1.0))
    throw UsageError(fmt::format("contamination must lie in (0, 1), got {}",
                                 contamination));
  std::vector<double> sorted(train_scores.begin(), train_scores.end());
  for (double s : sorted) {
    if (!std::isfinite(s)) throw NumericError("non-finite training score");
  }
  std::sort(sorted.begin(), sorted.end());
  return interpolated_quantile(sorted, 1.0 - contamination);
}

std::vector<double> score_all(const Scorer& scorer, const Dataset& data,
                              Execution exec) {
  if (scorer.dims() != data.dims())
    throw DataError(fmt::format("scorer expects {} features, data has {}",
                                scorer.dims(), data.dims()));
  const auto n = static_cast<std::ptrdiff_t>(data.rows());
  std::vector<double> out(data.rows());
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = scorer.score(data.row(i));
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = scorer.score(data.row(i));
  }
  return out;
}

}  // namespace acmead
