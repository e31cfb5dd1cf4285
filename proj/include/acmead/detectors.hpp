// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ACMEAD_DETECTORS_HPP_
#define ACMEAD_DETECTORS_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "acmead/core.hpp"

namespace acmead {

/// Average path length of an unsuccessful BST search over n points.
double average_path_length(std::size_t n) noexcept;

struct IsolationTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double split = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t size = 0;  // training points that reached the node
  };
  std::vector<Node> nodes;  // nodes[0] is the root

  double path_length(std::span<const double> sample) const;
  std::size_t depth() const;
};

struct IsolationForestParams {
  std::size_t trees = 100;
  std::size_t subsample = 256;  // clipped to n at fit time
  std::uint64_t seed = 0;
};

class IsolationForest final : public Scorer {
 public:
  IsolationForest(std::size_t dims, std::size_t subsample,
                  std::vector<IsolationTree> trees);

  static IsolationForest fit(const Dataset& data,
                             const IsolationForestParams& params);

  std::size_t dims() const override { return dims_; }
  /// 2^(-E[h(x)] / c(psi)), in (0, 1).
  double score(std::span<const double> sample) const override;

  std::size_t subsample() const noexcept { return subsample_; }
  double normalizer() const noexcept { return normalizer_; }
  const std::vector<IsolationTree>& trees() const noexcept { return trees_; }

 private:
  std::size_t dims_;
  std::size_t subsample_;
  double normalizer_;
  std::vector<IsolationTree> trees_;

  // Evaluation copy of every tree in one array. Children of a split are
  // adjacent; a leaf holds its c(size) correction in `value`.
  struct FlatNode {
    double value;
    std::int32_t feature;
    std::int32_t child;
  };
  std::vector<FlatNode> flat_;
  std::vector<std::int32_t> roots_;
};

struct LodaParams {
  std::size_t projections = 100;
  std::size_t bins = 100;
  std::uint64_t seed = 0;
};

/// One sparse random projection and the equal-width histogram of the
/// projected training data.
struct LodaComponent {
  std::vector<std::uint32_t> indices;
  std::vector<double> weights;
  double lo = 0.0;
  double width = 0.0;  // 0 for a single-bin (zero-spread) histogram
  std::vector<double> probabilities;

  double project(std::span<const double> sample) const;
  /// Smoothed bin probability; out-of-range values use the edge bin.
  double probability(double projected) const;
};

class Loda final : public Scorer {
 public:
  Loda(std::size_t dims, std::vector<LodaComponent> components);

  static Loda fit(const Dataset& data, const LodaParams& params);

  std::size_t dims() const override { return dims_; }
  /// Negative mean log-probability over projections, >= 0.
  double score(std::span<const double> sample) const override;

  const std::vector<LodaComponent>& components() const noexcept {
    return components_;
  }

 private:
  std::size_t dims_;
  std::vector<LodaComponent> components_;
};

/// A fitted detector together with its calibrated threshold. This is the
/// unit the CLI saves and loads.
class Detector final : public Scorer {
 public:
  using Model = std::variant<IsolationForest, Loda>;

  Detector(Model model, std::vector<std::string> feature_names,
           double threshold, double contamination, std::uint64_t seed);

  /// Fits `kind` ("iforest" or "loda") on `data` and sets the threshold at
  /// the (1 - contamination) quantile of the training scores.
  static Detector fit(const Dataset& data, const std::string& kind,
                      double contamination, std::uint64_t seed,
                      const IsolationForestParams& if_params = {},
                      const LodaParams& loda_params = {});

  std::size_t dims() const override;
  double score(std::span<const double> sample) const override;

  std::string kind() const;
  const Model& model() const noexcept { return model_; }
  const std::vector<std::string>& feature_names() const noexcept {
    return names_;
  }
  double threshold() const noexcept { return threshold_; }
  double contamination() const noexcept { return contamination_; }
  std::uint64_t seed() const noexcept { return seed_; }

  nlohmann::json to_json() const;
  static Detector from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static Detector load(const std::filesystem::path& path);

 private:
  Model model_;
  std::vector<std::string> names_;
  double threshold_;
  double contamination_;
  std::uint64_t seed_;
};

inline constexpr int kModelFormatVersion = 1;

/// Rank-based average precision of `scores` against binary labels.
double average_precision(std::span<const double> scores,
                         std::span<const int> labels);

}  // namespace acmead

#endif  // ACMEAD_DETECTORS_HPP_
