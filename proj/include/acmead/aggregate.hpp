// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ACMEAD_AGGREGATE_HPP_
#define ACMEAD_AGGREGATE_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acmead/core.hpp"
#include "acmead/explainer.hpp"

namespace acmead {

inline constexpr const char* kOthersName = "others";
inline constexpr double kDefaultMergeCutoff = 0.05;

/// matrix[j][k] is the fraction of anomalies whose local ranking put feature
/// j at position k + 1. Every column sums to one.
struct RankHistogram {
  std::vector<std::string> features;
  std::vector<std::vector<double>> matrix;
  std::size_t n_anomalies = 0;

  std::size_t positions() const noexcept {
    return matrix.empty() ? 0 : matrix.front().size();
  }
};

/// Counts feature occupancy of the first `positions` slots of each ranking
/// and normalizes by the number of rankings.
RankHistogram rank_histogram(const std::vector<std::string>& features,
                             const std::vector<std::vector<std::size_t>>& rankings,
                             std::size_t positions);

struct OverallResult {
  std::vector<std::size_t> anomalies;  // row indices flagged by the scorer
  std::vector<LocalExplanation> explanations;
  RankHistogram histogram;
};

/// Explains every row scoring above the threshold and histograms the rank
/// positions. `positions` == 0 selects min(d, 10). Throws if nothing is
/// flagged.
OverallResult overall_importance(const Scorer& scorer, const Dataset& data,
                                 const QuantileGrid& grid, const Weights& weights,
                                 double threshold, std::size_t positions = 0,
                                 Execution exec = Execution::serial);

/// Folds every feature whose share is below `cutoff` at all retained positions
/// into a trailing `others` row. Column sums and retained rows are unchanged.
RankHistogram merge_others(const RankHistogram& hist,
                           double cutoff = kDefaultMergeCutoff);

nlohmann::json to_json(const RankHistogram& hist);

}  // namespace acmead

#endif  // ACMEAD_AGGREGATE_HPP_
