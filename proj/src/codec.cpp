#include "openeye/codec.hpp"

namespace openeye::codec {

namespace {

std::string_view flag_name(study::DegenerateFlag f) {
  switch (f) {
    case study::DegenerateFlag::PrecisionUndefined: return "precision_undefined";
    case study::DegenerateFlag::RecallUndefined: return "recall_undefined";
    case study::DegenerateFlag::FUndefined: return "f_undefined";
  }
  return "unknown";
}

}  // namespace

json trial_set_json(const study::TrialSet& t) {
  return {{"image_ids", t.image_ids}, {"seed", t.seed}, {"test_size", t.test_size}};
}

study::TrialSet trial_set_from(const json& j) {
  study::TrialSet t;
  t.image_ids = j.at("image_ids").get<std::vector<std::string>>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.test_size = j.at("test_size").get<std::size_t>();
  return t;
}

json response_json(const study::Response& r) {
  return {{"image_id", r.image_id},
          {"verdict", to_string(r.verdict)},
          {"stage", study::to_string(r.stage)},
          {"elapsed_ms", r.elapsed_ms}};
}

study::Response response_from(const json& j) {
  study::Response r;
  r.image_id = j.at("image_id").get<std::string>();
  const auto verdict = parse_label(j.at("verdict").get<std::string>());
  const auto stage = study::parse_stage(j.at("stage").get<std::string>());
  if (!verdict || !stage) throw Error(Errc::BadRequest, "bad verdict or stage");
  r.verdict = *verdict;
  r.stage = *stage;
  r.elapsed_ms = j.at("elapsed_ms").get<std::uint64_t>();
  return r;
}

json metrics_json(const study::MetricsReport& m) {
  json flags = json::array();
  for (auto f : m.degenerate_flags) flags.push_back(flag_name(f));
  return {{"accuracy", m.accuracy},
          {"precision", m.precision},
          {"recall", m.recall},
          {"f_score", m.f_score},
          {"degenerate_flags", flags},
          {"confusion",
           {{"tp", m.confusion.tp}, {"fp", m.confusion.fp}, {"tn", m.confusion.tn}, {"fn", m.confusion.fn}}}};
}

json deltas_json(const study::MetricDeltas& d) {
  return {{"accuracy", d.accuracy}, {"precision", d.precision}, {"recall", d.recall}, {"f_score", d.f_score}};
}

json flips_json(const std::vector<study::Flip>& flips) {
  json out = json::array();
  for (const auto& f : flips)
    out.push_back({{"image_id", f.image_id},
                   {"stage1_verdict", to_string(f.stage1)},
                   {"stage3_verdict", to_string(f.stage3)}});
  return out;
}

json comparison_json(const study::ComparisonReport& c) {
  return {{"stage1", metrics_json(c.stage1)},
          {"stage3", metrics_json(c.stage3)},
          {"deltas", deltas_json(c.deltas)},
          {"flips", flips_json(c.flips)}};
}

json session_json(const study::StudySession& s) {
  json responses = json::array();
  for (const auto& r : s.responses) responses.push_back(response_json(r));
  return {{"session_id", s.session_id},
          {"alias", s.participant_alias},
          {"state", study::to_string(s.state)},
          {"created_at", s.created_at},
          {"trial_set", trial_set_json(s.trial_set)},
          {"stage1_order", s.stage1_order},
          {"stage3_order", s.stage3_order},
          {"responses", responses},
          {"course_progress", s.course_progress}};
}

json completed_session_json(const study::StudySession& s, const study::ComparisonReport& c) {
  json responses = json::array();
  for (const auto& r : s.responses) responses.push_back(response_json(r));
  return {{"session_id", s.session_id},
          {"alias", s.participant_alias},
          {"trial_set", trial_set_json(s.trial_set)},
          {"responses", responses},
          {"stage1_metrics", metrics_json(c.stage1)},
          {"stage3_metrics", metrics_json(c.stage3)},
          {"deltas", deltas_json(c.deltas)},
          {"flips", flips_json(c.flips)}};
}

json ellipse_json(const pupil::Ellipse& e) {
  return {{"cx", e.cx}, {"cy", e.cy}, {"a", e.a}, {"b", e.b}, {"theta", e.theta}};
}

json face_score_json(const std::string& image_id, const std::optional<pupil::PupilScore>& left,
                     const std::optional<pupil::PupilScore>& right, std::optional<double> aggregate) {
  auto eye = [](const std::optional<pupil::PupilScore>& s) -> json {
    if (!s) return nullptr;
    return {{"ellipse", ellipse_json(s->fitted)}, {"biou", s->biou}};
  };
  return {{"image_id", image_id},
          {"left", eye(left)},
          {"right", eye(right)},
          {"aggregate", aggregate ? json(*aggregate) : json(nullptr)}};
}

json ingest_report_json(const IngestReport& r) {
  json errors = json::array();
  for (const auto& e : r.errors)
    errors.push_back({{"line", e.line}, {"path", e.path}, {"error", to_string(e.code)}, {"detail", e.detail}});
  return {{"added", r.added}, {"skipped", r.skipped}, {"errors", errors}, {"exhibits", r.exhibits_written}};
}

json validation_json(const ValidationReport& v) {
  return {{"valid", v.valid},
          {"required_per_label", v.required_per_label},
          {"extractable", {{"real", v.extractable.real}, {"fake", v.extractable.fake}}},
          {"shortfall", {{"real", v.shortfall.real}, {"fake", v.shortfall.fake}}}};
}

}  // namespace openeye::codec
