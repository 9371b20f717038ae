#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

namespace semsnet {

/// Positive class: score >= threshold.
struct EvalConfig {
  double threshold = 7.0;
  double scale_max = 12.0;

  void validate() const;
};

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// A ratio with a zero denominator is left empty rather than reported as 0.
struct ClassificationMetrics {
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> accuracy;
  std::optional<double> f1;
};

double rmse(std::span<const double> predicted, std::span<const double> actual);

ConfusionCounts confusion(std::span<const double> predicted, std::span<const double> actual,
                          const EvalConfig& cfg);

ClassificationMetrics classify_metrics(const ConfusionCounts& counts);

/// `NA` for an empty optional, shortest round-trip decimal otherwise.
std::string format_metric(const std::optional<double>& value);

}  // namespace semsnet
