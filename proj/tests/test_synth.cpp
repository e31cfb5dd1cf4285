// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>

#include "acmead/detectors.hpp"
#include "acmead/synth.hpp"

using namespace acmead;

TEST_CASE("labels and counts match the request") {
  const auto d = generate({300, 20, 4, 1, 3.0, 1});
  CHECK(d.rows() == 320);
  CHECK(d.dims() == 4);
  REQUIRE(d.labels());
  CHECK(std::count(d.labels()->begin(), d.labels()->end(), 1) == 20);
  CHECK(d.feature_names().front() == "f0");
}

TEST_CASE("root feature of anomalies is shifted by about the requested amount") {
  const auto d = generate({5000, 100, 10, 3, 4.0, 2});
  double sum = 0.0;
  for (std::size_t i = 5000; i < 5100; ++i) sum += d.at(i, 3);
  CHECK(std::abs(sum / 100.0 - 4.0) <= 0.5);
}

TEST_CASE("normal feature moments sit within sampling bounds") {
  const std::size_t n = 5000;
  const auto d = generate({n, 10, 8, 0, 4.0, 3});
  for (std::size_t j = 0; j < 8; ++j) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += d.at(i, j);
    mean /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) sq += (d.at(i, j) - mean) * (d.at(i, j) - mean);
    const double var = sq / static_cast<double>(n - 1);
    CHECK(std::abs(mean) <= 3.0 / std::sqrt(static_cast<double>(n)));
    // Var of the sample variance of a unit Gaussian is 2 / (n - 1).
    CHECK(std::abs(var - 1.0) <= 3.0 * std::sqrt(2.0 / static_cast<double>(n - 1)));
  }
}

TEST_CASE("same seed, same bytes") {
  const SynthSpec spec{200, 10, 5, 2, 4.0, 77};
  CHECK(to_csv(generate(spec)) == to_csv(generate(spec)));
  auto other = spec;
  other.seed = 78;
  CHECK(to_csv(generate(spec)) != to_csv(generate(other)));
}

TEST_CASE("zero shift leaves anomalies indistinguishable") {
  const auto d = generate({2000, 100, 5, 0, 0.0, 4});
  const auto model = Detector::fit(d, "iforest", 100.0 / 2100.0, 1);
  const auto s = score_all(model, d);
  // No better than chance: AP near the base rate, far below a real detection.
  CHECK(average_precision(s, *d.labels()) < 0.2);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(generate({10, 1, 3, 3, 1.0, 0}), UsageError);
  CHECK_THROWS_AS(generate({10, 1, 3, 0, -1.0, 0}), UsageError);
  CHECK_THROWS_AS(generate({0, 1, 3, 0, 1.0, 0}), UsageError);
  CHECK_THROWS_AS(generate({10, 0, 3, 0, 1.0, 0}), UsageError);
  CHECK_THROWS_AS(generate({10, 1, 0, 0, 1.0, 0}), UsageError);
}
