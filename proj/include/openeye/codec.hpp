#pragma once

#include <nlohmann/json.hpp>

#include "openeye/image_pool.hpp"
#include "openeye/pupil.hpp"
#include "openeye/study.hpp"

// JSON encodings. Field names are lowercase snake_case and stable: they are
// the wire format of the HTTP API, the event log and the researcher export.
namespace openeye::codec {

using nlohmann::json;

json trial_set_json(const study::TrialSet& t);
study::TrialSet trial_set_from(const json& j);

json response_json(const study::Response& r);
study::Response response_from(const json& j);

json metrics_json(const study::MetricsReport& m);
json deltas_json(const study::MetricDeltas& d);
json flips_json(const std::vector<study::Flip>& flips);
json comparison_json(const study::ComparisonReport& c);

/// Full session document (every StudySession field).
json session_json(const study::StudySession& s);

/// One line of the completed-session export.
json completed_session_json(const study::StudySession& s, const study::ComparisonReport& c);

json ellipse_json(const pupil::Ellipse& e);

/// Batch scoring line: {image_id, left, right, aggregate}; a missing eye is null.
json face_score_json(const std::string& image_id,
                     const std::optional<pupil::PupilScore>& left,
                     const std::optional<pupil::PupilScore>& right,
                     std::optional<double> aggregate);

json ingest_report_json(const IngestReport& r);
json validation_json(const ValidationReport& v);

}  // namespace openeye::codec
