#include "semsnet/metrics.hpp"

#include <cmath>

#include "semsnet/errors.hpp"
#include "semsnet/session_data.hpp"

namespace semsnet {
namespace {

void check_pair(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.empty() || a.size() != b.size()) {
    throw DataError(std::string(what) + ": inputs must be non-empty and equally long");
  }
}

std::optional<double> ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

void EvalConfig::validate() const {
  if (!(scale_max > 0.0)) throw ConfigError("eval.scale_max must be positive");
  if (!(threshold > 0.0 && threshold <= scale_max)) {
    throw ConfigError("eval.threshold must lie in (0, scale_max]");
  }
}

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  check_pair(predicted, actual, "rmse");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

ConfusionCounts confusion(std::span<const double> predicted, std::span<const double> actual,
                          const EvalConfig& cfg) {
  check_pair(predicted, actual, "confusion");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] >= cfg.threshold;
    const bool true_pos = actual[i] >= cfg.threshold;
    if (pred_pos && true_pos) {
      ++c.tp;
    } else if (pred_pos) {
      ++c.fp;
    } else if (true_pos) {
      ++c.fn;
    } else {
      ++c.tn;
    }
  }
  return c;
}

ClassificationMetrics classify_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw DataError("classify_metrics: no evaluated pairs");
  ClassificationMetrics m;
  m.sensitivity = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.accuracy = ratio(c.tp + c.tn, c.total());
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

std::string format_metric(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string("NA");
}

}  // namespace semsnet
