#pragma once

#include <cstdint>
#include <set>

namespace openeye::study {

/// Binary confusion counts with Fake as the positive class.
struct ConfusionMatrix {
  std::uint32_t tp = 0;
  std::uint32_t fp = 0;
  std::uint32_t tn = 0;
  std::uint32_t fn = 0;

  std::uint32_t total() const noexcept { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

enum class DegenerateFlag { PrecisionUndefined, RecallUndefined, FUndefined };

struct MetricsReport {
  ConfusionMatrix confusion;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  std::set<DegenerateFlag> degenerate_flags;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

/// Accuracy, precision, recall and F1. Undefined ratios report 0 and raise the
/// matching flag instead of failing. An all-zero matrix reports accuracy 0.
MetricsReport metrics_from_confusion(const ConfusionMatrix& cm);

}  // namespace openeye::study
