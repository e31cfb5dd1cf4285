// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ACMEAD_BENCH_HPP_
#define ACMEAD_BENCH_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "acmead/core.hpp"
#include "acmead/explainer.hpp"

namespace acmead {

enum class Method { acme_ad, kernelshap };
const char* to_string(Method m) noexcept;

struct TimingRecord {
  Method method = Method::acme_ad;
  std::string detector;
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t background_size = 0;  // kernelshap only
  std::size_t levels = 0;           // K, acme_ad only
  std::size_t coalitions = 0;       // kernelshap only
  double seconds = 0.0;             // median over repeats
  std::size_t repeats = 0;
  std::uint64_t seed = 0;
  Execution exec = Execution::serial;
};

struct BenchConfig {
  std::string detector = "custom";
  std::size_t n = 0;                    // training rows, for the record
  const QuantileGrid* grid = nullptr;   // required for acme_ad
  Weights weights;
  double threshold = 0.0;
  const Dataset* background = nullptr;  // required for kernelshap
  std::size_t coalitions = 0;           // 0 selects 2d + 2048
  std::uint64_t seed = 0;
  std::size_t repeats = 3;
  Execution exec = Execution::serial;
};

/// Median wall time of one explanation of x over `config.repeats` runs after
/// a discarded warm-up run. Each output is checked for validity, then dropped.
TimingRecord time_single_explanation(Method method, const Scorer& scorer,
                                     std::span<const double> x,
                                     const BenchConfig& config);

/// KernelSHAP timings with backgrounds sampled at each (ascending) fraction
/// of `data`.
std::vector<TimingRecord> background_sweep(const Scorer& scorer,
                                           std::span<const double> x,
                                           const Dataset& data,
                                           const std::vector<double>& fractions,
                                           const BenchConfig& config);

/// A scorer, a point to explain and its grid, built for one dimensionality.
struct Workload {
  std::unique_ptr<Scorer> scorer;
  std::vector<double> point;
  QuantileGrid grid;
};
using WorkloadFactory = std::function<Workload(std::size_t dims)>;

/// AcME-AD timings across ascending dimensionalities.
std::vector<TimingRecord> dimension_sweep(const WorkloadFactory& factory,
                                          const std::vector<std::size_t>& dims,
                                          std::size_t n, const BenchConfig& config);

/// Burns a fixed amount of arithmetic per call whatever the dimensionality,
/// then returns a cheap function of the sample.
class FixedCostScorer final : public Scorer {
 public:
  FixedCostScorer(std::size_t dims, std::size_t work) : dims_(dims), work_(work) {}
  std::size_t dims() const override { return dims_; }
  double score(std::span<const double> sample) const override;

 private:
  std::size_t dims_;
  std::size_t work_;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};
LinearFit fit_line(std::span<const double> xs, std::span<const double> ys);

/// CSV with header method,background_size,n,d,K,coalitions,seconds followed
/// by detector,repeats,seed,execution.
std::string to_csv(const std::vector<TimingRecord>& records);

/// Plain-text table: method, background size (with percent of n), seconds.
std::string format_table(const std::vector<TimingRecord>& records);

}  // namespace acmead

#endif  // ACMEAD_BENCH_HPP_
