// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#include "acmead/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <fmt/format.h>

namespace acmead {

using nlohmann::json;

double average_path_length(std::size_t n) noexcept {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  constexpr double kEulerGamma = 0.5772156649015329;
  const double m = static_cast<double>(n);
  return 2.0 * (std::log(m - 1.0) + kEulerGamma) - 2.0 * (m - 1.0) / m;
}

double IsolationTree::path_length(std::span<const double> sample) const {
  std::int32_t at = 0;
  double depth = 0.0;
  while (true) {
    const Node& node = nodes[static_cast<std::size_t>(at)];
    if (node.feature < 0)
      return depth + average_path_length(static_cast<std::size_t>(node.size));
    at = sample[static_cast<std::size_t>(node.feature)] < node.split ? node.left
                                                                      : node.right;
    depth += 1.0;
  }
}

std::size_t IsolationTree::depth() const {
  std::vector<std::size_t> level(nodes.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (nodes[i].feature >= 0) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

namespace {

// Draws `k` distinct indices from [0, n) by a partial Fisher-Yates shuffle.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k,
                                                    std::mt19937_64& rng) {
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(k);
  return pool;
}

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, std::size_t max_depth, std::mt19937_64& rng)
      : data_(data), max_depth_(max_depth), rng_(rng) {}

  IsolationTree build(std::vector<std::size_t> rows) {
    rows_ = std::move(rows);
    tree_.nodes.clear();
    grow(0, rows_.size(), 0);
    return std::move(tree_);
  }

 private:
  // Grows the subtree over rows_[begin, end) and returns its node index.
  std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes.back().size = static_cast<std::int32_t>(end - begin);
    if (end - begin <= 1 || depth >= max_depth_) return id;

    std::vector<std::size_t> candidates;
    std::vector<std::pair<double, double>> bounds(data_.dims());
    for (std::size_t j = 0; j < data_.dims(); ++j) {
      double lo = data_.at(rows_[begin], j), hi = lo;
      for (std::size_t r = begin + 1; r < end; ++r) {
        const double v = data_.at(rows_[r], j);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      bounds[j] = {lo, hi};
      if (hi > lo) candidates.push_back(j);
    }
    if (candidates.empty()) return id;

    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const std::size_t feature = candidates[pick(rng_)];
    const auto [lo, hi] = bounds[feature];
    std::uniform_real_distribution<double> uniform(lo, hi);
    double split = uniform(rng_);
    while (split <= lo) split = uniform(rng_);

    auto mid = std::partition(
        rows_.begin() + static_cast<std::ptrdiff_t>(begin),
        rows_.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t r) { return data_.at(r, feature) < split; });
    const auto middle = static_cast<std::size_t>(mid - rows_.begin());

    const std::int32_t left = grow(begin, middle, depth + 1);
    const std::int32_t right = grow(middle, end, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(feature);
    node.split = split;
    node.left = left;
    node.right = right;
    return id;
  }

  const Dataset& data_;
  std::size_t max_depth_;
  std::mt19937_64& rng_;
  std::vector<std::size_t> rows_;
  IsolationTree tree_;
};

}  // namespace

IsolationForest::IsolationForest(std::size_t dims, std::size_t subsample,
                                 std::vector<IsolationTree> trees)
    : dims_(dims),
      subsample_(subsample),
      normalizer_(average_path_length(subsample)),
      trees_(std::move(trees)) {
  if (dims_ == 0) throw ModelError("isolation forest needs >= 1 feature");
  if (subsample_ < 2) throw ModelError("isolation forest subsample must be >= 2");
  if (trees_.empty()) throw ModelError("isolation forest needs >= 1 tree");
  for (const auto& tree : trees_) {
    if (tree.nodes.empty()) throw ModelError("isolation tree has no nodes");
    const auto count = static_cast<std::int32_t>(tree.nodes.size());
    for (std::int32_t i = 0; i < count; ++i) {
      const auto& node = tree.nodes[static_cast<std::size_t>(i)];
      if (node.feature >= static_cast<int>(dims_))
        throw ModelError("isolation tree splits on an unknown feature");
      // Children after their parent rules out cycles.
      if (node.feature >= 0 &&
          (node.left <= i || node.right <= i || node.left >= count ||
           node.right >= count || node.left == node.right))
        throw ModelError("isolation tree has a dangling child index");
    }
  }

  for (const auto& tree : trees_) {
    roots_.push_back(static_cast<std::int32_t>(flat_.size()));
    flat_.push_back({});
    // (source node, slot) pairs; each split claims two adjacent slots.
    std::vector<std::pair<std::int32_t, std::int32_t>> pending{{0, roots_.back()}};
    while (!pending.empty()) {
      const auto [src, slot] = pending.back();
      pending.pop_back();
      const auto& node = tree.nodes[static_cast<std::size_t>(src)];
      auto& out = flat_[static_cast<std::size_t>(slot)];
      if (node.feature < 0) {
        out = {average_path_length(static_cast<std::size_t>(std::max(node.size, 0))), -1, 0};
        continue;
      }
      const auto child = static_cast<std::int32_t>(flat_.size());
      out = {node.split, node.feature, child};
      flat_.push_back({});
      flat_.push_back({});
      pending.push_back({node.left, child});
      pending.push_back({node.right, child + 1});
    }
  }
}

IsolationForest IsolationForest::fit(const Dataset& data,
                                     const IsolationForestParams& params) {
  if (data.rows() < 2)
    throw DataError("isolation forest needs at least 2 rows");
  if (params.subsample < 2)
    throw UsageError("isolation forest subsample must be >= 2");
  if (params.trees < 1) throw UsageError("isolation forest needs >= 1 tree");

  const std::size_t psi = std::min(params.subsample, data.rows());
  const auto max_depth =
      static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(psi))));
  std::vector<IsolationTree> trees(params.trees);
  const auto count = static_cast<std::ptrdiff_t>(params.trees);

  // Each tree owns a generator derived from (seed, tree index), so the
  // forest is identical whatever the thread count.
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < count; ++t) {
    std::seed_seq seq{static_cast<std::uint32_t>(params.seed),
                      static_cast<std::uint32_t>(params.seed >> 32),
                      static_cast<std::uint32_t>(t)};
    std::mt19937_64 rng(seq);
    TreeBuilder builder(data, max_depth, rng);
    trees[static_cast<std::size_t>(t)] =
        builder.build(sample_without_replacement(data.rows(), psi, rng));
  }
  return IsolationForest(data.dims(), psi, std::move(trees));
}

double IsolationForest::score(std::span<const double> sample) const {
  if (sample.size() != dims_)
    throw DataError(fmt::format("sample has {} features, model expects {}",
                                sample.size(), dims_));
  const FlatNode* nodes = flat_.data();
  const double* x = sample.data();
  const auto step = [&](const FlatNode*& node, double& depth) {
    node = nodes + node->child + (x[node->feature] < node->value ? 0 : 1);
    depth += 1.0;
  };
  // Four walks in flight hide the load latency of each descent. Totals are
  // still accumulated in tree order.
  constexpr std::size_t kLanes = 4;
  const std::size_t count = roots_.size();
  double total = 0.0;
  std::size_t t = 0;
  for (; t + kLanes <= count; t += kLanes) {
    const FlatNode* node[kLanes];
    double depth[kLanes] = {};
    for (std::size_t k = 0; k < kLanes; ++k) node[k] = nodes + roots_[t + k];
    bool active = true;
    while (active) {
      active = false;
      for (std::size_t k = 0; k < kLanes; ++k) {
        if (node[k]->feature < 0) continue;
        step(node[k], depth[k]);
        active = true;
      }
    }
    for (std::size_t k = 0; k < kLanes; ++k) total += depth[k] + node[k]->value;
  }
  for (; t < count; ++t) {
    const FlatNode* node = nodes + roots_[t];
    double depth = 0.0;
    while (node->feature >= 0) step(node, depth);
    total += depth + node->value;
  }
  const double mean = total / static_cast<double>(trees_.size());
  return std::exp2(-mean / normalizer_);
}

double LodaComponent::project(std::span<const double> sample) const {
  double z = 0.0;
  for (std::size_t k = 0; k < indices.size(); ++k)
    z += weights[k] * sample[indices[k]];
  return z;
}

double LodaComponent::probability(double projected) const {
  if (width <= 0.0 || probabilities.size() == 1) return probabilities.front();
  const double pos = std::floor((projected - lo) / width);
  const double last = static_cast<double>(probabilities.size() - 1);
  return probabilities[static_cast<std::size_t>(std::clamp(pos, 0.0, last))];
}

Loda::Loda(std::size_t dims, std::vector<LodaComponent> components)
    : dims_(dims), components_(std::move(components)) {
  if (dims_ == 0) throw ModelError("LODA needs >= 1 feature");
  if (components_.empty()) throw ModelError("LODA needs >= 1 projection");
  for (const auto& c : components_) {
    if (c.indices.empty() || c.indices.size() != c.weights.size())
      throw ModelError("LODA projection is empty or malformed");
    for (auto j : c.indices) {
      if (j >= dims_) throw ModelError("LODA projection uses an unknown feature");
    }
    if (c.probabilities.empty())
      throw ModelError("LODA histogram has no bins");
    const double total =
        std::accumulate(c.probabilities.begin(), c.probabilities.end(), 0.0);
    if (std::abs(total - 1.0) > 1e-9)
      throw ModelError("LODA histogram probabilities do not sum to 1");
    for (double p : c.probabilities) {
      if (!(p > 0.0)) throw ModelError("LODA histogram has a non-positive bin");
    }
  }
}

Loda Loda::fit(const Dataset& data, const LodaParams& params) {
  if (params.projections < 1) throw UsageError("LODA needs >= 1 projection");
  if (params.bins < 1) throw UsageError("LODA needs >= 1 bin");
  const std::size_t d = data.dims();
  const auto nonzero = static_cast<std::size_t>(
      std::ceil(std::sqrt(static_cast<double>(d))));

  std::mt19937_64 rng(params.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<LodaComponent> components(params.projections);
  std::vector<double> projected(data.rows());
  const double n = static_cast<double>(data.rows());

  for (auto& c : components) {
    auto picked = sample_without_replacement(d, nonzero, rng);
    std::sort(picked.begin(), picked.end());
    for (std::size_t j : picked) {
      c.indices.push_back(static_cast<std::uint32_t>(j));
      c.weights.push_back(gauss(rng));
    }

    for (std::size_t i = 0; i < data.rows(); ++i) projected[i] = c.project(data.row(i));
    const auto [lo_it, hi_it] = std::minmax_element(projected.begin(), projected.end());
    c.lo = *lo_it;
    const double spread = *hi_it - *lo_it;
    if (!(spread > 0.0)) {
      c.width = 0.0;
      c.probabilities = {1.0};
      continue;
    }
    c.width = spread / static_cast<double>(params.bins);
    std::vector<double> counts(params.bins, 0.0);
    for (double z : projected) {
      const double pos = std::floor((z - c.lo) / c.width);
      const auto bin = static_cast<std::size_t>(
          std::clamp(pos, 0.0, static_cast<double>(params.bins - 1)));
      counts[bin] += 1.0;
    }
    c.probabilities.resize(params.bins);
    const double denom = n + static_cast<double>(params.bins);
    for (std::size_t b = 0; b < params.bins; ++b)
      c.probabilities[b] = (counts[b] + 1.0) / denom;
  }
  return Loda(d, std::move(components));
}

double Loda::score(std::span<const double> sample) const {
  if (sample.size() != dims_)
    throw DataError(fmt::format("sample has {} features, model expects {}",
                                sample.size(), dims_));
  double total = 0.0;
  for (const auto& c : components_) total += std::log(c.probability(c.project(sample)));
  // -0.0 is folded into +0.0 so a single-bin model scores exactly zero.
  return -total / static_cast<double>(components_.size()) + 0.0;
}

Detector::Detector(Model model, std::vector<std::string> feature_names,
                   double threshold, double contamination, std::uint64_t seed)
    : model_(std::move(model)),
      names_(std::move(feature_names)),
      threshold_(threshold),
      contamination_(contamination),
      seed_(seed) {
  if (names_.size() != dims())
    throw ModelError("feature name count does not match the model dimension");
  if (!std::isfinite(threshold_)) throw ModelError("threshold is not finite");
}

Detector Detector::fit(const Dataset& data, const std::string& kind,
                       double contamination, std::uint64_t seed,
                       const IsolationForestParams& if_params,
                       const LodaParams& loda_params) {
  if (!(contamination > 0.0 && contamination < 1.0))
    throw UsageError(fmt::format("contamination must lie in (0, 1), got {}",
                                 contamination));
  auto fitted = [&]() -> Model {
    if (kind == "iforest") {
      auto p = if_params;
      p.seed = seed;
      return IsolationForest::fit(data, p);
    }
    if (kind == "loda") {
      auto p = loda_params;
      p.seed = seed;
      return Loda::fit(data, p);
    }
    throw UsageError(fmt::format("unknown model '{}' (expected iforest or loda)", kind));
  }();
  const auto scores = std::visit(
      [&](const auto& m) { return score_all(m, data, Execution::parallel); }, fitted);
  const double tau = fit_threshold(scores, contamination);
  return Detector(std::move(fitted), data.feature_names(), tau, contamination, seed);
}

std::size_t Detector::dims() const {
  return std::visit([](const auto& m) { return m.dims(); }, model_);
}

double Detector::score(std::span<const double> sample) const {
  return std::visit([&](const auto& m) { return m.score(sample); }, model_);
}

std::string Detector::kind() const {
  return std::holds_alternative<IsolationForest>(model_) ? "iforest" : "loda";
}

json Detector::to_json() const {
  json doc{{"format", "acmead-model"},
           {"version", kModelFormatVersion},
           {"kind", kind()},
           {"feature_names", names_},
           {"threshold", threshold_},
           {"contamination", contamination_},
           {"seed", seed_}};
  if (const auto* forest = std::get_if<IsolationForest>(&model_)) {
    json trees = json::array();
    for (const auto& tree : forest->trees()) {
      json feature = json::array(), split = json::array(), left = json::array(),
           right = json::array(), size = json::array();
      for (const auto& node : tree.nodes) {
        feature.push_back(node.feature);
        split.push_back(node.split);
        left.push_back(node.left);
        right.push_back(node.right);
        size.push_back(node.size);
      }
      trees.push_back({{"feature", feature}, {"split", split}, {"left", left},
                       {"right", right}, {"size", size}});
    }
    doc["iforest"] = {{"subsample", forest->subsample()}, {"trees", trees}};
  } else {
    const auto& loda = std::get<Loda>(model_);
    json components = json::array();
    for (const auto& c : loda.components()) {
      components.push_back({{"indices", c.indices},
                            {"weights", c.weights},
                            {"lo", c.lo},
                            {"width", c.width},
                            {"probabilities", c.probabilities}});
    }
    doc["loda"] = {{"components", components}};
  }
  return doc;
}

Detector Detector::from_json(const json& doc) {
  try {
    if (doc.at("format") != "acmead-model")
      throw ModelError("not an acmead model document");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ModelError(fmt::format("unsupported model version {}", version));
    auto names = doc.at("feature_names").get<std::vector<std::string>>();
    const double tau = doc.at("threshold").get<double>();
    const double contamination = doc.at("contamination").get<double>();
    const auto seed = doc.at("seed").get<std::uint64_t>();
    const auto kind = doc.at("kind").get<std::string>();

    if (kind == "iforest") {
      const auto& body = doc.at("iforest");
      std::vector<IsolationTree> trees;
      for (const auto& t : body.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto split = t.at("split").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<std::int32_t>>();
        const auto right = t.at("right").get<std::vector<std::int32_t>>();
        const auto size = t.at("size").get<std::vector<std::int32_t>>();
        const std::size_t count = feature.size();
        if (split.size() != count || left.size() != count ||
            right.size() != count || size.size() != count)
          throw ModelError("isolation tree arrays differ in length");
        IsolationTree tree;
        tree.nodes.resize(count);
        for (std::size_t i = 0; i < count; ++i)
          tree.nodes[i] = {feature[i], split[i], left[i], right[i], size[i]};
        trees.push_back(std::move(tree));
      }
      IsolationForest forest(names.size(), body.at("subsample").get<std::size_t>(),
                             std::move(trees));
      return Detector(std::move(forest), std::move(names), tau, contamination, seed);
    }
    if (kind == "loda") {
      std::vector<LodaComponent> components;
      for (const auto& c : doc.at("loda").at("components")) {
        LodaComponent comp;
        comp.indices = c.at("indices").get<std::vector<std::uint32_t>>();
        comp.weights = c.at("weights").get<std::vector<double>>();
        comp.lo = c.at("lo").get<double>();
        comp.width = c.at("width").get<double>();
        comp.probabilities = c.at("probabilities").get<std::vector<double>>();
        components.push_back(std::move(comp));
      }
      Loda loda(names.size(), std::move(components));
      return Detector(std::move(loda), std::move(names), tau, contamination, seed);
    }
    throw ModelError(fmt::format("unknown model kind '{}'", kind));
  } catch (const json::exception& e) {
    throw ModelError(fmt::format("malformed model document: {}", e.what()));
  }
}

void Detector::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ModelError(fmt::format("cannot write '{}'", path.string()));
  out << to_json().dump(1) << '\n';
}

Detector Detector::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError(fmt::format("cannot open model '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ModelError(fmt::format("model '{}' is not valid JSON: {}",
                                 path.string(), e.what()));
  }
  return from_json(doc);
}

double average_precision(std::span<const double> scores,
                         std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty())
    throw UsageError("average precision needs equal-length, non-empty inputs");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0) throw UsageError("average precision needs a positive label");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  // Tied scores form one threshold step.
  double ap = 0.0, tp = 0.0, seen = 0.0, prev_recall = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      tp += labels[order[j]] == 1 ? 1.0 : 0.0;
      seen += 1.0;
      ++j;
    }
    const double recall = tp / static_cast<double>(positives);
    ap += (recall - prev_recall) * (tp / seen);
    prev_recall = recall;
    i = j;
  }
  return ap;
}

}  // namespace acmead
