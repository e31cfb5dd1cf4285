// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ACMEAD_VIZ_HPP_
#define ACMEAD_VIZ_HPP_

#include <string>
#include <vector>

#include "acmead/aggregate.hpp"
#include "acmead/explainer.hpp"

namespace acmead {

struct SvgSize {
  int width = 900;
  int height = 600;
};

/// Blue (level 0) to green (level 1), as "rgb(r,g,b)".
std::string level_color(double level);

/// What-if bubble chart: the top_k features by importance, one row each.
/// Small bubbles are the perturbation curve colored by quantile level; the
/// large bubble is the point itself, on the red dashed score line; the black
/// solid line is the threshold.
std::string render_whatif(const LocalExplanation& e,
                          const std::vector<std::string>& names,
                          std::size_t top_k = 10, SvgSize size = {});

/// Stacked bars, one per rank position, in percent. `others` is drawn last in
/// gray.
std::string render_rank_bars(const RankHistogram& hist, SvgSize size = {});

}  // namespace acmead

#endif  // ACMEAD_VIZ_HPP_
