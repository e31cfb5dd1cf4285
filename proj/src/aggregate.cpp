// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include "acmead/aggregate.hpp"

#include <algorithm>
#include <exception>

#include <fmt/format.h>

namespace acmead {

RankHistogram rank_histogram(const std::vector<std::string>& features,
                             const std::vector<std::vector<std::size_t>>& rankings,
                             std::size_t positions) {
  if (rankings.empty()) throw UsageError("no anomalies detected");
  if (positions == 0 || positions > features.size())
    throw UsageError(fmt::format("positions must lie in [1, {}], got {}",
                                 features.size(), positions));
  RankHistogram h;
  h.features = features;
  h.n_anomalies = rankings.size();
  h.matrix.assign(features.size(), std::vector<double>(positions, 0.0));
  for (const auto& ranking : rankings) {
    if (ranking.size() != features.size())
      throw UsageError("ranking length does not match the feature count");
    for (std::size_t k = 0; k < positions; ++k) h.matrix.at(ranking[k])[k] += 1.0;
  }
  const double n = static_cast<double>(rankings.size());
  for (auto& row : h.matrix) {
    for (double& v : row) v /= n;
  }
  return h;
}

OverallResult overall_importance(const Scorer& scorer, const Dataset& data,
                                 const QuantileGrid& grid, const Weights& weights,
                                 double threshold, std::size_t positions,
                                 Execution exec) {
  validate_weights(weights);
  if (positions == 0) positions = std::min<std::size_t>(data.dims(), 10);

  OverallResult result;
  const auto scores = score_all(scorer, data, exec);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (classify(scores[i], threshold) == Classification::anomalous)
      result.anomalies.push_back(i);
  }
  if (result.anomalies.empty()) throw UsageError("no anomalies detected");

  const std::size_t count = result.anomalies.size();
  result.explanations.resize(count);
  auto one = [&](std::size_t a) {
    result.explanations[a] = explain(scorer, data.row(result.anomalies[a]), grid,
                                     weights, threshold, Execution::serial);
  };
  if (exec == Execution::parallel) {
    std::vector<std::exception_ptr> failures(count);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t a = 0; a < static_cast<std::ptrdiff_t>(count); ++a) {
      try {
        one(static_cast<std::size_t>(a));
      } catch (...) {
        failures[static_cast<std::size_t>(a)] = std::current_exception();
      }
    }
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  } else {
    for (std::size_t a = 0; a < count; ++a) one(a);
  }

  std::vector<std::vector<std::size_t>> rankings;
  rankings.reserve(count);
  for (const auto& e : result.explanations) rankings.push_back(e.ranking);
  result.histogram = rank_histogram(data.feature_names(), rankings, positions);
  return result;
}

RankHistogram merge_others(const RankHistogram& hist, double cutoff) {
  if (!(cutoff > 0.0 && cutoff < 1.0))
    throw UsageError(fmt::format("cutoff must lie in (0, 1), got {}", cutoff));

  RankHistogram out;
  out.n_anomalies = hist.n_anomalies;
  std::vector<double> others(hist.positions(), 0.0);
  bool merged = false;
  for (std::size_t j = 0; j < hist.features.size(); ++j) {
    const auto& row = hist.matrix[j];
    const bool rare = hist.features[j] == kOthersName ||
                      std::all_of(row.begin(), row.end(),
                                  [&](double v) { return v < cutoff; });
    if (!rare) {
      out.features.push_back(hist.features[j]);
      out.matrix.push_back(row);
      continue;
    }
    merged = true;
    for (std::size_t k = 0; k < row.size(); ++k) others[k] += row[k];
  }
  if (!merged) return hist;
  out.features.emplace_back(kOthersName);
  out.matrix.push_back(std::move(others));
  return out;
}

nlohmann::json to_json(const RankHistogram& hist) {
  std::vector<std::size_t> positions(hist.positions());
  for (std::size_t k = 0; k < positions.size(); ++k) positions[k] = k + 1;
  return {{"features", hist.features},
          {"positions", positions},
          {"matrix", hist.matrix},
          {"n_anomalies", hist.n_anomalies}};
}

}  // namespace acmead
