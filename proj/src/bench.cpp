// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include "acmead/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iterator>

#include <fmt/format.h>

#include "acmead/shapref.hpp"

namespace acmead {

const char* to_string(Method m) noexcept {
  return m == Method::acme_ad ? "acme_ad" : "kernelshap";
}

namespace {

void run_once(Method method, const Scorer& scorer, std::span<const double> x,
              const BenchConfig& config, std::size_t coalitions) {
  if (method == Method::acme_ad) {
    const auto e = explain(scorer, x, *config.grid, config.weights, config.threshold,
                           config.exec);
    for (double v : e.importance) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw NumericError("benchmarked explanation has an invalid importance");
    }
    return;
  }
  const auto e = kernel_shap(scorer, x, *config.background, coalitions, config.seed,
                             config.exec);
  double total = e.base_value;
  for (double p : e.phi) total += p;
  if (std::abs(total - e.score) > 1e-6 * std::max(1.0, std::abs(e.score)))
    throw NumericError("benchmarked KernelSHAP explanation violates additivity");
}

}  // namespace

TimingRecord time_single_explanation(Method method, const Scorer& scorer,
                                     std::span<const double> x,
                                     const BenchConfig& config) {
  if (config.repeats < 3)
    throw UsageError(fmt::format("repeats must be >= 3, got {}", config.repeats));
  if (method == Method::acme_ad && config.grid == nullptr)
    throw UsageError("acme_ad timing needs a quantile grid");
  if (method == Method::kernelshap && config.background == nullptr)
    throw UsageError("kernelshap timing needs a background dataset");

  TimingRecord rec;
  rec.method = method;
  rec.detector = config.detector;
  rec.n = config.n;
  rec.d = x.size();
  rec.repeats = config.repeats;
  rec.seed = config.seed;
  rec.exec = config.exec;
  const std::size_t coalitions =
      config.coalitions ? config.coalitions : default_coalitions(x.size());
  if (method == Method::acme_ad) {
    rec.levels = config.grid->size();
  } else {
    rec.background_size = config.background->rows();
    rec.coalitions = coalitions;
  }

  try {
    run_once(method, scorer, x, config, coalitions);  // warm-up
    std::vector<double> seconds;
    for (std::size_t r = 0; r < config.repeats; ++r) {
      const auto start = std::chrono::steady_clock::now();
      run_once(method, scorer, x, config, coalitions);
      const auto stop = std::chrono::steady_clock::now();
      seconds.push_back(std::chrono::duration<double>(stop - start).count());
    }
    std::sort(seconds.begin(), seconds.end());
    const std::size_t mid = seconds.size() / 2;
    rec.seconds = seconds.size() % 2 ? seconds[mid] : 0.5 * (seconds[mid - 1] + seconds[mid]);
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{} timing (d={}, background={}): {}",
                                      to_string(method), rec.d, rec.background_size,
                                      e.what()));
  }
  // Clock granularity can report zero for trivial runs.
  rec.seconds = std::max(rec.seconds, 1e-9);
  return rec;
}

std::vector<TimingRecord> background_sweep(const Scorer& scorer,
                                           std::span<const double> x,
                                           const Dataset& data,
                                           const std::vector<double>& fractions,
                                           const BenchConfig& config) {
  if (fractions.empty()) throw UsageError("background sweep needs >= 1 fraction");
  if (!std::is_sorted(fractions.begin(), fractions.end()))
    throw UsageError("background fractions must be ascending");
  std::vector<TimingRecord> out;
  for (double f : fractions) {
    const Dataset background = sample_background(data, f, config.seed);
    BenchConfig c = config;
    c.background = &background;
    c.n = data.rows();
    out.push_back(time_single_explanation(Method::kernelshap, scorer, x, c));
  }
  return out;
}

std::vector<TimingRecord> dimension_sweep(const WorkloadFactory& factory,
                                          const std::vector<std::size_t>& dims,
                                          std::size_t n, const BenchConfig& config) {
  if (!std::is_sorted(dims.begin(), dims.end()))
    throw UsageError("dimension sweep values must be ascending");
  std::vector<TimingRecord> out;
  for (std::size_t d : dims) {
    const Workload w = factory(d);
    BenchConfig c = config;
    c.grid = &w.grid;
    c.n = n;
    out.push_back(time_single_explanation(Method::acme_ad, *w.scorer, w.point, c));
  }
  return out;
}

double FixedCostScorer::score(std::span<const double> sample) const {
  if (sample.size() != dims_)
    throw DataError(fmt::format("sample has {} features, scorer expects {}",
                                sample.size(), dims_));
  double acc = sample[0];
  for (std::size_t i = 0; i < work_; ++i) acc = std::sin(acc) + 1e-3;
  double sum = 0.0;
  for (double v : sample) sum += v;
  return sum + 1e-6 * acc;
}

LinearFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw UsageError("line fit needs >= 2 paired points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw UsageError("line fit needs distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

std::string to_csv(const std::vector<TimingRecord>& records) {
  std::string out =
      "method,background_size,n,d,K,coalitions,seconds,detector,repeats,seed,execution\n";
  for (const auto& r : records) {
    fmt::format_to(std::back_inserter(out), "{},{},{},{},{},{},{:.6f},{},{},{},{}\n",
                   to_string(r.method), r.background_size, r.n, r.d, r.levels,
                   r.coalitions, r.seconds, r.detector, r.repeats, r.seed,
                   r.exec == Execution::parallel ? "parallel" : "serial");
  }
  return out;
}

std::string format_table(const std::vector<TimingRecord>& records) {
  std::string detector = records.empty() ? "" : records.front().detector;
  std::string out = fmt::format("{:<12} {:>6} {:>20} {:>24}\n", "", "d", "Background Size",
                                fmt::format("Elapsed time {} (s)", detector));
  out += std::string(65, '-') + "\n";
  for (const auto& r : records) {
    const bool shap = r.method == Method::kernelshap;
    const std::size_t size = shap ? r.background_size : r.n;
    std::string bg = fmt::format("{}", size);
    if (r.n > 0)
      bg += fmt::format(" ({:.0f}%)", 100.0 * static_cast<double>(size) / static_cast<double>(r.n));
    fmt::format_to(std::back_inserter(out), "{:<12} {:>6} {:>20} {:>24.4f}\n",
                   shap ? "KernelSHAP" : "AcME-AD", r.d, bg, r.seconds);
  }
  return out;
}

}  // namespace acmead
