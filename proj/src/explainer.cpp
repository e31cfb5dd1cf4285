// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include "acmead/explainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

namespace acmead {

Weights validate_weights(const Weights& w) {
  const double parts[] = {w.delta, w.change, w.distance, w.ratio};
  for (double p : parts) {
    if (!std::isfinite(p) || p < 0.0)
      throw UsageError(fmt::format("weights must be non-negative, got {}", p));
  }
  const double sum = w.delta + w.change + w.distance + w.ratio;
  if (std::abs(sum - 1.0) > 1e-9)
    throw UsageError(fmt::format("weights must sum to 1, got sum={}", sum));
  return w;
}

Weights parse_weights(const std::string& text) {
  std::vector<double> parts;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw UsageError(fmt::format("weight '{}' is not a number", cell));
    }
  }
  if (parts.size() != 4)
    throw UsageError(fmt::format("expected 4 weights wD,wC,wQ,wR, got {}", parts.size()));
  return validate_weights({parts[0], parts[1], parts[2], parts[3]});
}

PerturbationCurve perturbation_curve(const Scorer& scorer,
                                     std::span<const double> x,
                                     std::size_t feature,
                                     const QuantileGrid& grid) {
  if (x.size() != scorer.dims() || x.size() != grid.dims())
    throw DataError(fmt::format("point has {} features, scorer expects {}, grid has {}",
                                x.size(), scorer.dims(), grid.dims()));
  if (feature >= x.size())
    throw UsageError(fmt::format("feature {} out of range", feature));

  PerturbationCurve curve;
  curve.feature = feature;
  curve.levels = grid.levels();
  curve.scores.resize(grid.size());
  std::vector<double> probe(x.begin(), x.end());
  const auto values = grid.values(feature);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    probe[feature] = values[k];
    const double s = scorer.score(probe);
    if (!std::isfinite(s))
      throw NumericError(fmt::format("scorer returned {} for feature {} at level {}",
                                     s, feature, curve.levels[k]));
    curve.scores[k] = s;
  }
  return curve;
}

FeatureMetrics feature_metrics(const PerturbationCurve& curve, double score,
                               double threshold, double point_level) {
  if (curve.scores.empty() || curve.scores.size() != curve.levels.size())
    throw UsageError("perturbation curve is empty or malformed");
  FeatureMetrics m;
  const auto [lo, hi] = std::minmax_element(curve.scores.begin(), curve.scores.end());
  m.raw_delta = *hi - *lo;
  if (m.raw_delta > 0.0) m.ratio = std::clamp((score - *lo) / m.raw_delta, 0.0, 1.0);

  const Classification original = classify(score, threshold);
  double nearest = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < curve.scores.size(); ++k) {
    if (classify(curve.scores[k], threshold) != original)
      nearest = std::min(nearest, std::abs(curve.levels[k] - point_level));
  }
  if (std::isfinite(nearest)) {
    m.change = 1.0;
    m.distance = std::clamp(1.0 - nearest, 0.0, 1.0);
  }
  return m;
}

std::vector<std::size_t> rank_by_importance(std::span<const double> importance) {
  std::vector<std::size_t> order(importance.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return importance[a] > importance[b];
  });
  return order;
}

LocalExplanation explain(const Scorer& scorer, std::span<const double> x,
                         const QuantileGrid& grid, const Weights& weights,
                         double threshold, Execution exec) {
  validate_weights(weights);
  const std::size_t d = x.size();
  if (d != scorer.dims() || d != grid.dims())
    throw DataError(fmt::format("point has {} features, scorer expects {}, grid has {}",
                                d, scorer.dims(), grid.dims()));

  LocalExplanation e;
  e.point.assign(x.begin(), x.end());
  e.threshold = threshold;
  e.weights = weights;
  e.score = scorer.score(x);
  if (!std::isfinite(e.score))
    throw NumericError(fmt::format("scorer returned {} for the explained point", e.score));
  e.classification = classify(e.score, threshold);
  e.point_levels.resize(d);
  for (std::size_t j = 0; j < d; ++j) e.point_levels[j] = grid.level_of(j, x[j]);

  e.curves.resize(d);
  e.metrics.resize(d);
  auto one_feature = [&](std::size_t j) {
    e.curves[j] = perturbation_curve(scorer, x, j, grid);
    e.metrics[j] = feature_metrics(e.curves[j], e.score, threshold, e.point_levels[j]);
  };
  if (exec == Execution::parallel) {
    std::vector<std::exception_ptr> failures(d);
    const auto count = static_cast<std::ptrdiff_t>(d);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < count; ++j) {
      try {
        one_feature(static_cast<std::size_t>(j));
      } catch (...) {
        failures[static_cast<std::size_t>(j)] = std::current_exception();
      }
    }
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  } else {
    for (std::size_t j = 0; j < d; ++j) one_feature(j);
  }

  double widest = 0.0;
  for (const auto& m : e.metrics) widest = std::max(widest, m.raw_delta);
  e.importance.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    auto& m = e.metrics[j];
    m.delta = widest > 0.0 ? m.raw_delta / widest : 0.0;
    e.importance[j] = std::clamp(weights.delta * m.delta + weights.change * m.change +
                                     weights.distance * m.distance +
                                     weights.ratio * m.ratio,
                                 0.0, 1.0);
  }
  e.ranking = rank_by_importance(e.importance);
  return e;
}

nlohmann::json to_json(const LocalExplanation& e,
                       const std::vector<std::string>& names,
                       std::size_t point_id) {
  using nlohmann::json;
  if (names.size() != e.point.size())
    throw UsageError("feature name count does not match the explanation");
  std::vector<std::size_t> rank_of(e.ranking.size());
  for (std::size_t r = 0; r < e.ranking.size(); ++r) rank_of[e.ranking[r]] = r + 1;

  json features = json::array();
  for (std::size_t j = 0; j < names.size(); ++j) {
    json curve = json::array();
    for (std::size_t k = 0; k < e.curves[j].levels.size(); ++k)
      curve.push_back({e.curves[j].levels[k], e.curves[j].scores[k]});
    const auto& m = e.metrics[j];
    features.push_back({{"name", names[j]},
                        {"value", e.point[j]},
                        {"level_of_x", e.point_levels[j]},
                        {"curve", curve},
                        {"metrics",
                         {{"D", m.delta},
                          {"R", m.ratio},
                          {"C", m.change},
                          {"Q", m.distance},
                          {"raw_delta", m.raw_delta}}},
                        {"importance", e.importance[j]},
                        {"rank", rank_of[j]}});
  }
  return {{"method", "acme_ad"},
          {"point_id", point_id},
          {"score", e.score},
          {"threshold", e.threshold},
          {"classification", to_string(e.classification)},
          {"weights",
           {{"D", e.weights.delta},
            {"C", e.weights.change},
            {"Q", e.weights.distance},
            {"R", e.weights.ratio}}},
          {"ranking", e.ranking},
          {"features", features}};
}

}  // namespace acmead
