// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ACMEAD_SHAPREF_HPP_
#define ACMEAD_SHAPREF_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "acmead/core.hpp"

namespace acmead {

/// Uniform sample without replacement of ceil(fraction * n) rows.
Dataset sample_background(const Dataset& data, double fraction, std::uint64_t seed);

struct ShapExplanation {
  double base_value = 0.0;   // mean score over the background
  double score = 0.0;        // s(x)
  std::vector<double> phi;   // one attribution per feature
  std::size_t coalitions = 0;  // distinct coalitions evaluated
  std::size_t background_size = 0;
  bool exact = false;          // all 2^d coalitions enumerated
  bool ridge_fallback = false; // regression needed damping
};

/// 2d + 2048.
std::size_t default_coalitions(std::size_t dims) noexcept;

/// Model-agnostic KernelSHAP. A masked feature takes each background row's
/// value in turn and the scores are averaged exactly over the background.
/// Coalitions are weighted by the Shapley kernel and fitted by weighted least
/// squares with the empty and full coalitions imposed as constraints. With
/// d <= 16 and a budget >= 2^d every coalition is enumerated. The parallel
/// path evaluates coalitions concurrently and matches the serial result.
ShapExplanation kernel_shap(const Scorer& scorer, std::span<const double> x,
                            const Dataset& background, std::size_t coalitions,
                            std::uint64_t seed, Execution exec = Execution::serial);

/// Features by descending |phi|, ties to the lower index.
std::vector<std::size_t> shap_ranking(std::span<const double> phi);

nlohmann::json to_json(const ShapExplanation& e,
                       const std::vector<std::string>& names, std::size_t point_id,
                       double threshold);

}  // namespace acmead

#endif  // ACMEAD_SHAPREF_HPP_
