// Copyright 2026 The acmead Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef ACMEAD_CORE_HPP_
#define ACMEAD_CORE_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace acmead {

/// Failure categories. Each maps onto one CLI exit code.
enum class ErrorKind { usage = 1, data = 2, model = 3, numeric = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }
  int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};
struct ModelError : Error {
  explicit ModelError(const std::string& what) : Error(ErrorKind::model, what) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& what)
      : Error(ErrorKind::numeric, what) {}
};

/// Row-major numeric matrix with named features and an optional binary label
/// column (1 = anomalous) kept apart from the features.
class Dataset {
 public:
  Dataset(std::vector<std::string> feature_names, std::vector<double> values,
          std::optional<std::vector<int>> labels = std::nullopt);

  std::size_t rows() const noexcept { return n_; }
  std::size_t dims() const noexcept { return names_.size(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * dims(), dims()};
  }
  double at(std::size_t i, std::size_t j) const {
    return values_[i * dims() + j];
  }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::string>& feature_names() const noexcept {
    return names_;
  }
  const std::optional<std::vector<int>>& labels() const noexcept {
    return labels_;
  }

  /// All values of feature j, in row order.
  std::vector<double> column(std::size_t j) const;

  /// New dataset holding the given rows (labels follow their rows).
  Dataset select_rows(std::span<const std::size_t> indices) const;

 private:
  std::vector<std::string> names_;
  std::vector<double> values_;
  std::optional<std::vector<int>> labels_;
  std::size_t n_ = 0;
};

enum class LabelColumn {
  absent,   // every column is a feature
  present,  // last column holds labels
  detect,   // labels iff the last header cell is `label`
};

Dataset load_csv(const std::filesystem::path& path,
                 LabelColumn labels = LabelColumn::detect);
Dataset parse_csv(const std::string& text,
                  LabelColumn labels = LabelColumn::detect);

/// Writes the header and rows; appends a `label` column when labels exist.
/// Numbers use the shortest representation that round-trips.
std::string to_csv(const Dataset& data);
void save_csv(const Dataset& data, const std::filesystem::path& path);

/// Empirical quantile of `sorted` at probability p, with linear interpolation
/// between order statistics at position p * (n - 1).
double interpolated_quantile(std::span<const double> sorted, double p);

/// Per-feature table of empirical quantiles at K evenly spaced levels
/// {0, 1/(K-1), ..., 1}. Row j is non-decreasing, starts at the feature's
/// minimum and ends at its maximum.
class QuantileGrid {
 public:
  QuantileGrid(std::vector<double> levels,
               std::vector<std::vector<double>> values);

  std::size_t size() const noexcept { return levels_.size(); }
  std::size_t dims() const noexcept { return values_.size(); }
  const std::vector<double>& levels() const noexcept { return levels_; }
  std::span<const double> values(std::size_t j) const { return values_[j]; }

  /// Empirical CDF position of v within feature j, clamped to [0, 1].
  double level_of(std::size_t j, double v) const;
  /// Quantile of feature j at an arbitrary level (piecewise linear).
  double value_at(std::size_t j, double level) const;

 private:
  std::vector<double> levels_;
  std::vector<std::vector<double>> values_;
};

inline constexpr std::size_t kDefaultQuantileLevels = 51;

QuantileGrid build_quantile_grid(const Dataset& data,
                                 std::size_t levels = kDefaultQuantileLevels);

/// Model-agnostic scoring contract. Higher scores are more anomalous.
/// Implementations are immutable after fitting and safe for concurrent calls.
class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::size_t dims() const = 0;
  virtual double score(std::span<const double> sample) const = 0;
};

enum class Classification { normal, anomalous };

/// Selects the serial reference loop or its OpenMP counterpart.
enum class Execution { serial, parallel };

/// Anomalous iff score > threshold. A score equal to the threshold is normal.
constexpr Classification classify(double score, double threshold) noexcept {
  return score > threshold ? Classification::anomalous
                           : Classification::normal;
}

const char* to_string(Classification c) noexcept;

/// The (1 - contamination) quantile of the training scores.
double fit_threshold(std::span<const double> train_scores,
                     double contamination);

/// Scores every row of `data`.
std::vector<double> score_all(const Scorer& scorer, const Dataset& data,
                              Execution exec = Execution::serial);

}  // namespace acmead

#endif  // ACMEAD_CORE_HPP_
