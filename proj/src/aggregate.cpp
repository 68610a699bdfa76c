#include "openeye/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "openeye/codec.hpp"

namespace openeye::service {

namespace {

// Summing in sorted order makes the result independent of session order.
MeanStd mean_std(std::vector<double> xs) {
  std::sort(xs.begin(), xs.end());
  MeanStd out;
  if (xs.empty()) return out;
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - out.mean) * (x - out.mean);
  out.stddev = std::sqrt(ss / static_cast<double>(xs.size()));
  return out;
}

StageStats stage_stats(const std::vector<study::MetricsReport>& reports) {
  std::vector<double> acc, prec, rec, f;
  for (const auto& r : reports) {
    acc.push_back(r.accuracy);
    prec.push_back(r.precision);
    rec.push_back(r.recall);
    f.push_back(r.f_score);
  }
  return {mean_std(acc), mean_std(prec), mean_std(rec), mean_std(f)};
}

nlohmann::json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"stddev", m.stddev}}; }

nlohmann::json stage_json(const StageStats& s) {
  return {{"accuracy", mean_std_json(s.accuracy)},
          {"precision", mean_std_json(s.precision)},
          {"recall", mean_std_json(s.recall)},
          {"f_score", mean_std_json(s.f_score)}};
}

}  // namespace

AggregateReport aggregate(std::span<const study::StudySession> sessions, const study::LabelMap& labels) {
  AggregateReport report;
  std::vector<study::MetricsReport> first, second;
  for (const auto& s : sessions) {
    if (s.state != study::StageState::Complete) continue;
    const study::ComparisonReport c = study::compare_stages(s, labels);
    first.push_back(c.stage1);
    second.push_back(c.stage3);
    for (const auto& id : s.trial_set.image_ids) ++report.per_image[id].appearances;
    for (const auto& r : s.responses) {
      if (r.verdict == labels.at(r.image_id)) continue;
      auto& rate = report.per_image[r.image_id];
      ++(r.stage == study::Stage::Stage1 ? rate.stage1_errors : rate.stage3_errors);
    }
  }
  report.n_sessions = first.size();
  report.stage1 = stage_stats(first);
  report.stage3 = stage_stats(second);
  report.mean_delta = {report.stage3.accuracy.mean - report.stage1.accuracy.mean,
                       report.stage3.precision.mean - report.stage1.precision.mean,
                       report.stage3.recall.mean - report.stage1.recall.mean,
                       report.stage3.f_score.mean - report.stage1.f_score.mean};
  for (auto& [id, rate] : report.per_image) {
    rate.stage1_rate = static_cast<double>(rate.stage1_errors) / static_cast<double>(rate.appearances);
    rate.stage3_rate = static_cast<double>(rate.stage3_errors) / static_cast<double>(rate.appearances);
  }
  return report;
}

nlohmann::json aggregate_json(const AggregateReport& report) {
  nlohmann::json images = nlohmann::json::array();
  for (const auto& [id, rate] : report.per_image)
    images.push_back({{"image_id", id},
                      {"appearances", rate.appearances},
                      {"stage1_error_rate", rate.stage1_rate},
                      {"stage3_error_rate", rate.stage3_rate}});
  return {{"n_sessions", report.n_sessions},
          {"stage1", stage_json(report.stage1)},
          {"stage3", stage_json(report.stage3)},
          {"mean_delta", codec::deltas_json(report.mean_delta)},
          {"per_image_error_rates", images}};
}

}  // namespace openeye::service
