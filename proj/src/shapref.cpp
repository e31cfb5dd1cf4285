// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include "acmead/shapref.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <numeric>
#include <random>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace acmead {

Dataset sample_background(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw UsageError(fmt::format("background fraction must lie in (0, 1], got {}",
                                 fraction));
  const std::size_t n = data.rows();
  // Truncates like the reference sweeps (25% of 2725 rows is 681), with the
  // epsilon absorbing products such as 0.1 * 36500 landing just below 3650.
  auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 1e-9));
  k = std::clamp<std::size_t>(k, 1, n);

  std::mt19937_64 rng(seed);
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return data.select_rows(pool);
}

std::size_t default_coalitions(std::size_t dims) noexcept { return 2 * dims + 2048; }

namespace {

using Mask = std::vector<std::uint8_t>;

double binomial(std::size_t n, std::size_t k) {
  return std::exp(std::lgamma(static_cast<double>(n) + 1.0) -
                  std::lgamma(static_cast<double>(k) + 1.0) -
                  std::lgamma(static_cast<double>(n - k) + 1.0));
}

// Shapley kernel weight of a single coalition of size s out of d features.
double kernel_weight(std::size_t d, std::size_t s) {
  const double sd = static_cast<double>(s);
  const double dd = static_cast<double>(d);
  return (dd - 1.0) / (binomial(d, s) * sd * (dd - sd));
}

std::map<Mask, double> enumerate_all(std::size_t d) {
  std::map<Mask, double> out;
  const std::uint32_t total = 1u << d;
  for (std::uint32_t bits = 1; bits + 1 < total; ++bits) {
    Mask m(d);
    std::size_t s = 0;
    for (std::size_t j = 0; j < d; ++j) {
      m[j] = (bits >> j) & 1u;
      s += m[j];
    }
    out.emplace(std::move(m), kernel_weight(d, s));
  }
  return out;
}

// Draws coalitions from the normalized Shapley kernel, in complementary
// pairs; repeated draws accumulate weight.
std::map<Mask, double> sample_coalitions(std::size_t d, std::size_t budget,
                                         std::uint64_t seed) {
  std::vector<double> size_mass(d - 1);
  for (std::size_t s = 1; s < d; ++s)
    size_mass[s - 1] = 1.0 / (static_cast<double>(s) * static_cast<double>(d - s));
  std::discrete_distribution<std::size_t> pick_size(size_mass.begin(), size_mass.end());
  std::mt19937_64 rng(seed);

  std::map<Mask, double> out;
  std::vector<std::size_t> pool(d);
  const std::size_t pairs = (budget + 1) / 2;
  for (std::size_t p = 0; p < pairs; ++p) {
    const std::size_t s = pick_size(rng) + 1;
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    Mask m(d, 0);
    for (std::size_t i = 0; i < s; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, d - 1);
      std::swap(pool[i], pool[pick(rng)]);
      m[pool[i]] = 1;
    }
    Mask complement(d);
    for (std::size_t j = 0; j < d; ++j) complement[j] = 1 - m[j];
    out[std::move(m)] += 1.0;
    out[std::move(complement)] += 1.0;
  }
  return out;
}

double finite_score(const Scorer& scorer, std::span<const double> sample) {
  const double s = scorer.score(sample);
  if (!std::isfinite(s))
    throw NumericError(fmt::format("scorer returned {} during KernelSHAP", s));
  return s;
}

// Mean score over the background with the coalition's features taken from x.
double coalition_value(const Scorer& scorer, std::span<const double> x,
                       const Mask& mask, const Dataset& background,
                       std::vector<double>& probe) {
  double total = 0.0;
  for (std::size_t b = 0; b < background.rows(); ++b) {
    auto row = background.row(b);
    for (std::size_t j = 0; j < x.size(); ++j) probe[j] = mask[j] ? x[j] : row[j];
    total += finite_score(scorer, probe);
  }
  return total / static_cast<double>(background.rows());
}

}  // namespace

ShapExplanation kernel_shap(const Scorer& scorer, std::span<const double> x,
                            const Dataset& background, std::size_t coalitions,
                            std::uint64_t seed, Execution exec) {
  const std::size_t d = x.size();
  if (coalitions < 2)
    throw UsageError(fmt::format("coalitions must be >= 2, got {}", coalitions));
  if (d != scorer.dims() || d != background.dims())
    throw DataError(fmt::format("point has {} features, scorer expects {}, background has {}",
                                d, scorer.dims(), background.dims()));

  ShapExplanation e;
  e.background_size = background.rows();
  e.score = finite_score(scorer, x);
  e.base_value = 0.0;
  for (std::size_t b = 0; b < background.rows(); ++b)
    e.base_value += finite_score(scorer, background.row(b));
  e.base_value /= static_cast<double>(background.rows());
  const double gap = e.score - e.base_value;

  if (d == 1) {
    e.phi = {gap};
    e.exact = true;
    return e;
  }

  e.exact = d <= 16 && static_cast<double>(coalitions) >= std::ldexp(1.0, static_cast<int>(d));
  const auto weighted = e.exact ? enumerate_all(d) : sample_coalitions(d, coalitions, seed);
  std::vector<const Mask*> masks;
  std::vector<double> weights;
  for (const auto& [mask, w] : weighted) {
    masks.push_back(&mask);
    weights.push_back(w);
  }
  const std::size_t m = masks.size();
  e.coalitions = m;

  std::vector<double> values(m);
  if (exec == Execution::parallel) {
    std::vector<std::exception_ptr> failures(m);
#pragma omp parallel
    {
      std::vector<double> probe(d);
#pragma omp for schedule(dynamic)
      for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(m); ++c) {
        const auto i = static_cast<std::size_t>(c);
        try {
          values[i] = coalition_value(scorer, x, *masks[i], background, probe);
        } catch (...) {
          failures[i] = std::current_exception();
        }
      }
    }
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  } else {
    std::vector<double> probe(d);
    for (std::size_t i = 0; i < m; ++i)
      values[i] = coalition_value(scorer, x, *masks[i], background, probe);
  }

  // The full-coalition constraint sum(phi) = gap eliminates the last feature:
  // v(z) - base - z_last * gap = sum_{j<last} (z_j - z_last) phi_j.
  const std::size_t last = d - 1;
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(last),
                                                 static_cast<Eigen::Index>(last));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(last));
  Eigen::VectorXd row(static_cast<Eigen::Index>(last));
  for (std::size_t i = 0; i < m; ++i) {
    const Mask& z = *masks[i];
    const double y = values[i] - e.base_value - static_cast<double>(z[last]) * gap;
    for (std::size_t j = 0; j < last; ++j)
      row[static_cast<Eigen::Index>(j)] = static_cast<double>(z[j]) - static_cast<double>(z[last]);
    normal.noalias() += weights[i] * row * row.transpose();
    rhs.noalias() += weights[i] * y * row;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success || llt.rcond() < 1e-12) {
    e.ridge_fallback = true;
    const double scale = std::max(1.0, normal.diagonal().maxCoeff());
    normal.diagonal().array() += 1e-8 * scale;
    llt.compute(normal);
    if (llt.info() != Eigen::Success)
      throw NumericError("KernelSHAP regression is singular even after ridge damping");
  }
  const Eigen::VectorXd solved = llt.solve(rhs);

  e.phi.resize(d);
  double assigned = 0.0;
  for (std::size_t j = 0; j < last; ++j) {
    e.phi[j] = solved[static_cast<Eigen::Index>(j)];
    assigned += e.phi[j];
  }
  e.phi[last] = gap - assigned;
  for (double p : e.phi) {
    if (!std::isfinite(p)) throw NumericError("KernelSHAP produced a non-finite attribution");
  }
  return e;
}

std::vector<std::size_t> shap_ranking(std::span<const double> phi) {
  std::vector<std::size_t> order(phi.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(phi[a]) > std::abs(phi[b]);
  });
  return order;
}

nlohmann::json to_json(const ShapExplanation& e,
                       const std::vector<std::string>& names, std::size_t point_id,
                       double threshold) {
  if (names.size() != e.phi.size())
    throw UsageError("feature name count does not match the attribution vector");
  const auto ranking = shap_ranking(e.phi);
  std::vector<std::size_t> rank_of(ranking.size());
  for (std::size_t r = 0; r < ranking.size(); ++r) rank_of[ranking[r]] = r + 1;
  nlohmann::json features = nlohmann::json::array();
  for (std::size_t j = 0; j < names.size(); ++j)
    features.push_back({{"name", names[j]}, {"phi", e.phi[j]}, {"rank", rank_of[j]}});
  return {{"method", "kernelshap"},
          {"point_id", point_id},
          {"score", e.score},
          {"threshold", threshold},
          {"classification", to_string(classify(e.score, threshold))},
          {"phi0", e.base_value},
          {"phi", e.phi},
          {"coalitions", e.coalitions},
          {"background_size", e.background_size},
          {"exact", e.exact},
          {"ridge_fallback", e.ridge_fallback},
          {"ranking", ranking},
          {"features", features}};
}

}  // namespace acmead
