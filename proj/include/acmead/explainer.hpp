// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ACMEAD_EXPLAINER_HPP_
#define ACMEAD_EXPLAINER_HPP_

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acmead/core.hpp"

namespace acmead {

/// Convex weights of the four metrics in the importance score.
struct Weights {
  double delta = 0.3;     // w_D
  double change = 0.3;    // w_C
  double distance = 0.2;  // w_Q
  double ratio = 0.2;     // w_R
};

/// Accepts weights that are non-negative and sum to 1 within 1e-9.
Weights validate_weights(const Weights& w);

/// Parses "wD,wC,wQ,wR" and validates it.
Weights parse_weights(const std::string& text);

/// Anomaly scores of x with feature `feature` swept over every grid level.
struct PerturbationCurve {
  std::size_t feature = 0;
  std::vector<double> levels;
  std::vector<double> scores;
};

struct FeatureMetrics {
  double raw_delta = 0.0;  // max - min of the curve
  double delta = 0.0;      // D: raw_delta over the largest raw_delta
  double ratio = 0.0;      // R
  double change = 0.0;     // C, 0 or 1
  double distance = 0.0;   // Q
};

struct LocalExplanation {
  std::vector<double> point;
  double score = 0.0;
  double threshold = 0.0;
  Classification classification = Classification::normal;
  Weights weights;
  std::vector<double> point_levels;  // level_of(x_j) per feature
  std::vector<PerturbationCurve> curves;
  std::vector<FeatureMetrics> metrics;
  std::vector<double> importance;
  std::vector<std::size_t> ranking;  // feature indices, most important first
};

/// Sweeps feature j of x over the grid: exactly grid.size() scorer calls.
PerturbationCurve perturbation_curve(const Scorer& scorer,
                                     std::span<const double> x,
                                     std::size_t feature,
                                     const QuantileGrid& grid);

/// Ratio, change-of-class and distance-to-change of one curve. `delta` is
/// left at zero; it needs every feature's curve and is filled by explain().
FeatureMetrics feature_metrics(const PerturbationCurve& curve, double score,
                               double threshold, double point_level);

/// Importance-descending feature order; ties go to the lower index.
std::vector<std::size_t> rank_by_importance(std::span<const double> importance);

/// Full local explanation of x: d * K + 1 scorer calls. The parallel path
/// computes curves for different features concurrently and yields the same
/// result as the serial one.
LocalExplanation explain(const Scorer& scorer, std::span<const double> x,
                         const QuantileGrid& grid, const Weights& weights,
                         double threshold, Execution exec = Execution::serial);

/// JSON document for one explanation. `names` labels the features.
nlohmann::json to_json(const LocalExplanation& e,
                       const std::vector<std::string>& names,
                       std::size_t point_id);

}  // namespace acmead

#endif  // ACMEAD_EXPLAINER_HPP_
