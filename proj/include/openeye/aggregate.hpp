#pragma once

#include <map>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "openeye/study.hpp"

namespace openeye::service {

struct MeanStd {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

struct StageStats {
  MeanStd accuracy;
  MeanStd precision;
  MeanStd recall;
  MeanStd f_score;
};

struct ImageErrorRate {
  std::size_t appearances = 0;
  std::size_t stage1_errors = 0;
  std::size_t stage3_errors = 0;
  double stage1_rate = 0.0;
  double stage3_rate = 0.0;
};

struct AggregateReport {
  std::size_t n_sessions = 0;
  StageStats stage1;
  StageStats stage3;
  study::MetricDeltas mean_delta;
  std::map<std::string, ImageErrorRate> per_image;  // keyed by image id
};

/// Statistics over completed sessions; sessions in any other state are
/// ignored. The result does not depend on the order of `sessions`.
AggregateReport aggregate(std::span<const study::StudySession> sessions, const study::LabelMap& labels);

nlohmann::json aggregate_json(const AggregateReport& report);

}  // namespace openeye::service
