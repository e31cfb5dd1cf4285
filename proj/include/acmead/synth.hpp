// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ACMEAD_SYNTH_HPP_
#define ACMEAD_SYNTH_HPP_

#include <cstdint>

#include "acmead/core.hpp"

namespace acmead {

struct SynthSpec {
  std::size_t n_normal = 5000;
  std::size_t n_anomalies = 100;
  std::size_t dims = 10;
  std::size_t root_feature = 0;
  double shift = 4.0;  // in feature standard deviations
  std::uint64_t seed = 0;
};

/// Normals come from a unit-variance Gaussian with mild random correlations;
/// anomalies are drawn the same way and then shifted along the root feature.
/// Normals come first, then anomalies; features are named f0, f1, ...
Dataset generate(const SynthSpec& spec);

}  // namespace acmead

#endif  // ACMEAD_SYNTH_HPP_
