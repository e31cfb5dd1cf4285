// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numeric>
#include <random>

#include "acmead/aggregate.hpp"
#include "acmead/detectors.hpp"
#include "acmead/synth.hpp"
#include "scorers.hpp"

using namespace acmead;

namespace {

void check_columns_sum_to_one(const RankHistogram& h) {
  for (std::size_t k = 0; k < h.positions(); ++k) {
    double total = 0.0;
    for (const auto& row : h.matrix) {
      CHECK(row[k] >= 0.0);
      CHECK(row[k] <= 1.0);
      total += row[k];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

std::vector<std::string> names(std::size_t d) {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < d; ++j) out.push_back("f" + std::to_string(j));
  return out;
}

}  // namespace

TEST_CASE("unanimous rankings") {
  const auto h = rank_histogram({"f1", "f2"}, {{0, 1}, {0, 1}}, 2);
  CHECK(h.matrix[0][0] == 1.0);
  CHECK(h.matrix[1][1] == 1.0);
  CHECK(h.matrix[0][1] == 0.0);
  CHECK(h.n_anomalies == 2);
}

TEST_CASE("symmetric split rankings") {
  const auto h = rank_histogram({"f1", "f2"}, {{0, 1}, {1, 0}}, 2);
  for (const auto& row : h.matrix) {
    for (double v : row) CHECK(v == 0.5);
  }
}

TEST_CASE("rank histogram rejects bad inputs") {
  CHECK_THROWS_AS(rank_histogram({"a"}, {}, 1), UsageError);
  CHECK_THROWS_AS(rank_histogram({"a", "b"}, {{0, 1}}, 3), UsageError);
  CHECK_THROWS_AS(rank_histogram({"a", "b"}, {{0}}, 1), UsageError);
}

TEST_CASE("merge_others is a no-op when nothing is rare") {
  const auto h = rank_histogram({"f1", "f2"}, {{0, 1}, {1, 0}}, 2);
  const auto m = merge_others(h);
  CHECK(m.features == h.features);
  CHECK(m.matrix == h.matrix);
}

TEST_CASE("merge_others folds thirty rare features into one bar") {
  // 30 features, each first in exactly one of 30 anomalies: 1/30 < 0.05.
  std::vector<std::vector<std::size_t>> rankings;
  for (std::size_t a = 0; a < 30; ++a) {
    std::vector<std::size_t> r(30);
    for (std::size_t k = 0; k < 30; ++k) r[k] = (a + k) % 30;
    rankings.push_back(r);
  }
  const auto h = rank_histogram(names(30), rankings, 5);
  const auto m = merge_others(h, 0.05);
  REQUIRE(m.features.size() == 1);
  CHECK(m.features[0] == kOthersName);
  for (double v : m.matrix[0]) CHECK(v == doctest::Approx(1.0));
  CHECK(kDefaultMergeCutoff == 0.05);
}

TEST_CASE("merging keeps retained rows and column sums (property)") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t d = 3 + static_cast<std::size_t>(trial % 20);
    const std::size_t anomalies = 1 + static_cast<std::size_t>(trial * 3 % 60);
    std::vector<std::vector<std::size_t>> rankings;
    std::vector<double> bias(d);
    std::exponential_distribution<double> e(1.0);
    for (auto& b : bias) b = e(rng);
    for (std::size_t a = 0; a < anomalies; ++a) {
      std::vector<double> key(d);
      std::normal_distribution<double> g;
      for (std::size_t j = 0; j < d; ++j) key[j] = bias[j] + g(rng);
      rankings.push_back(rank_by_importance(key));
    }
    const auto h = rank_histogram(names(d), rankings, std::min<std::size_t>(d, 10));
    check_columns_sum_to_one(h);
    const auto m = merge_others(h, 0.05);
    check_columns_sum_to_one(m);
    for (std::size_t r = 0; r < m.features.size(); ++r) {
      if (m.features[r] == kOthersName) continue;
      const auto j = static_cast<std::size_t>(
          std::find(h.features.begin(), h.features.end(), m.features[r]) - h.features.begin());
      CHECK(m.matrix[r] == h.matrix[j]);
    }
  }
}

TEST_CASE("merge_others rejects cutoffs outside (0, 1)") {
  const auto h = rank_histogram({"a"}, {{0}}, 1);
  CHECK_THROWS_AS(merge_others(h, 0.0), UsageError);
  CHECK_THROWS_AS(merge_others(h, 1.0), UsageError);
}

TEST_CASE("overall importance with nothing flagged is an error") {
  const acmead::testing::FunctionScorer zero(2, [](std::span<const double>) { return 0.0; });
  const Dataset data({"a", "b"}, {1, 2, 3, 4});
  const auto grid = build_quantile_grid(data, 3);
  try {
    overall_importance(zero, data, grid, Weights{}, 0.5);
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()) == "no anomalies detected");
  }
}

TEST_CASE("overall importance recovers the injected feature") {
  const auto data = generate({1500, 30, 6, 4, 4.0, 3});
  const auto model = Detector::fit(data, "iforest", 0.02, 5);
  const auto grid = build_quantile_grid(data);
  const auto result = overall_importance(model, data, grid, Weights{}, model.threshold());
  CHECK(result.histogram.positions() == 6);
  check_columns_sum_to_one(result.histogram);
  const auto& first = result.histogram.matrix;
  std::size_t best = 0;
  for (std::size_t j = 1; j < 6; ++j) {
    if (first[j][0] > first[best][0]) best = j;
  }
  CHECK(best == 4);
  // Each flagged row contributes one unit of mass per position, which the
  // per-anomaly explanations confirm.
  std::size_t root_first = 0;
  for (const auto& e : result.explanations) root_first += e.ranking[0] == 4;
  CHECK(first[4][0] == doctest::Approx(static_cast<double>(root_first) /
                                       static_cast<double>(result.anomalies.size())));

  const auto parallel = overall_importance(model, data, grid, Weights{}, model.threshold(), 0,
                                           Execution::parallel);
  CHECK(parallel.histogram.matrix == result.histogram.matrix);
  CHECK(parallel.anomalies == result.anomalies);
}

TEST_CASE("histogram JSON layout") {
  const auto h = rank_histogram({"f1", "f2"}, {{0, 1}, {1, 0}}, 2);
  const auto doc = to_json(h);
  CHECK(doc["features"] == std::vector<std::string>{"f1", "f2"});
  CHECK(doc["positions"] == std::vector<int>{1, 2});
  CHECK(doc["n_anomalies"] == 2);
  CHECK(doc["matrix"][0][1] == 0.5);
}
