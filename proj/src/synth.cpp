// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include "acmead/synth.hpp"

#include <cmath>
#include <random>

#include <fmt/format.h>

namespace acmead {

Dataset generate(const SynthSpec& spec) {
  if (spec.dims < 1) throw UsageError("synthetic data needs >= 1 feature");
  if (spec.n_normal < 1 || spec.n_anomalies < 1)
    throw UsageError("synthetic data needs >= 1 normal and >= 1 anomalous row");
  if (spec.root_feature >= spec.dims)
    throw UsageError(fmt::format("root feature {} out of range for {} features",
                                 spec.root_feature, spec.dims));
  if (!std::isfinite(spec.shift) || spec.shift < 0.0)
    throw UsageError(fmt::format("shift must be finite and >= 0, got {}", spec.shift));

  const std::size_t d = spec.dims;
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> coupling(-0.3, 0.3);

  // Unit-diagonal lower-triangular mixing with rows scaled to unit norm, so
  // every feature keeps unit variance while picking up weak correlations.
  std::vector<double> mix(d * d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    double norm = 1.0;
    mix[j * d + j] = 1.0;
    for (std::size_t i = 0; i < j; ++i) {
      const double c = coupling(rng) / std::sqrt(static_cast<double>(j));
      mix[j * d + i] = c;
      norm += c * c;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i <= j; ++i) mix[j * d + i] /= norm;
  }

  const std::size_t n = spec.n_normal + spec.n_anomalies;
  std::vector<double> values(n * d);
  std::vector<int> labels(n, 0);
  std::vector<double> z(d);
  for (std::size_t r = 0; r < n; ++r) {
    for (auto& v : z) v = gauss(rng);
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      for (std::size_t i = 0; i <= j; ++i) v += mix[j * d + i] * z[i];
      values[r * d + j] = v;
    }
    if (r >= spec.n_normal) {
      labels[r] = 1;
      values[r * d + spec.root_feature] += spec.shift;
    }
  }

  std::vector<std::string> names(d);
  for (std::size_t j = 0; j < d; ++j) names[j] = fmt::format("f{}", j);
  return Dataset(std::move(names), std::move(values), std::move(labels));
}

}  // namespace acmead
