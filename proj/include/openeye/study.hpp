#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "openeye/image_pool.hpp"
#include "openeye/metrics.hpp"

namespace openeye::study {

/// Session lifecycle. Transitions only move forward one step at a time.
enum class StageState {
  Created,
  Stage1InProgress,
  Stage1Complete,
  TutorialInProgress,
  TutorialComplete,
  Stage3InProgress,
  Complete,
};

std::string_view to_string(StageState state);
std::optional<StageState> parse_state(std::string_view text);

enum class Stage { Stage1, Stage3 };

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view text);

using LabelMap = std::map<std::string, Label>;

inline constexpr std::size_t kDefaultTestSize = 20;
/// XORed into the session seed to derive the Stage 3 presentation order.
inline constexpr std::uint64_t kStage3SeedMask = 0x9E3779B97F4A7C15ULL;

/// Balanced trial set: the first half of `image_ids` is Real, the second Fake.
struct TrialSet {
  std::vector<std::string> image_ids;
  std::uint64_t seed = 0;
  std::size_t test_size = kDefaultTestSize;

  bool contains(const std::string& id) const;
  friend bool operator==(const TrialSet&, const TrialSet&) = default;
};

struct Response {
  std::string image_id;
  Label verdict = Label::Real;
  Stage stage = Stage::Stage1;
  std::uint64_t elapsed_ms = 0;
  friend bool operator==(const Response&, const Response&) = default;
};

struct StudySession {
  std::string session_id;
  std::string participant_alias;
  StageState state = StageState::Created;
  TrialSet trial_set;
  std::vector<std::size_t> stage1_order;  // permutation of trial_set indices
  std::vector<std::size_t> stage3_order;
  std::vector<Response> responses;  // submission order
  std::set<std::string> course_progress;
  std::string created_at;  // ISO-8601 UTC

  friend bool operator==(const StudySession&, const StudySession&) = default;
};

struct SessionConfig {
  std::size_t test_size = kDefaultTestSize;
  std::uint64_t seed = 0;
};

/// Uniform sample without replacement of test_size/2 eye-extractable ids per
/// label. Candidates are taken in id order so the draw depends only on pool
/// contents, test_size and seed.
TrialSet sample_trial_set(const ImagePool& pool, std::size_t test_size, std::uint64_t seed);

/// Samples the trial set and both presentation orders; the session starts in
/// Stage1InProgress.
StudySession create_session(const ImagePool& pool, std::string session_id, std::string alias,
                            const SessionConfig& config, std::string created_at);

/// Presentation order of the trial images for a stage.
std::vector<std::string> presentation_order(const StudySession& session, Stage stage);

std::vector<Response> responses_for(const StudySession& session, Stage stage);

/// Trial images with no response yet at `stage`, in presentation order.
std::vector<std::string> missing_responses(const StudySession& session, Stage stage);

// Mutating operations validate fully before touching the session, so a
// rejected call leaves it unchanged.

void submit_response(StudySession& session, Stage stage, const std::string& image_id,
                     Label verdict, std::uint64_t elapsed_ms);

/// Scores the stage in progress and advances Stage1InProgress -> Stage1Complete
/// or Stage3InProgress -> Complete.
MetricsReport complete_stage(StudySession& session, const LabelMap& labels);

/// Stage1Complete -> TutorialInProgress.
void begin_tutorial(StudySession& session);

/// Marks a course done while the tutorial is in progress. Ordering and
/// membership are checked by the tutorial module before this is called.
void mark_course_complete(StudySession& session, const std::string& course_id,
                          std::size_t course_count);

/// TutorialComplete -> Stage3InProgress; every required course must be done.
void begin_stage3(StudySession& session, std::span<const std::string> required_courses);

MetricsReport compute_metrics(std::span<const Response> responses, const LabelMap& labels);

struct MetricDeltas {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  friend bool operator==(const MetricDeltas&, const MetricDeltas&) = default;
};

struct Flip {
  std::string image_id;
  Label stage1 = Label::Real;
  Label stage3 = Label::Real;
  friend bool operator==(const Flip&, const Flip&) = default;
};

struct ComparisonReport {
  MetricsReport stage1;
  MetricsReport stage3;
  MetricDeltas deltas;  // stage3 - stage1
  std::vector<Flip> flips;  // in trial_set order
};

MetricDeltas metric_deltas(const MetricsReport& before, const MetricsReport& after);

ComparisonReport compare_stages(const StudySession& session, const LabelMap& labels);

}  // namespace openeye::study
