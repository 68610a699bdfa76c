#include "openeye/study.hpp"

#include <algorithm>
#include <numeric>

#include "openeye/rng.hpp"

namespace openeye::study {

namespace {

constexpr std::string_view kStateNames[] = {
    "created",          "stage1_in_progress", "stage1_complete", "tutorial_in_progress",
    "tutorial_complete", "stage3_in_progress", "complete",
};

StageState in_progress_state(Stage stage) {
  return stage == Stage::Stage1 ? StageState::Stage1InProgress : StageState::Stage3InProgress;
}

[[noreturn]] void wrong_stage(const StudySession& s, std::string_view op) {
  throw Error(Errc::WrongStage,
              std::string(op) + " not allowed in state " + std::string(to_string(s.state)));
}

void shuffle_indices(std::vector<std::size_t>& order, CounterRng& rng) {
  fisher_yates(std::span<std::size_t>(order), rng);
}

}  // namespace

std::string_view to_string(StageState state) { return kStateNames[static_cast<int>(state)]; }

std::optional<StageState> parse_state(std::string_view text) {
  for (int i = 0; i < 7; ++i)
    if (kStateNames[i] == text) return static_cast<StageState>(i);
  return std::nullopt;
}

std::string_view to_string(Stage stage) { return stage == Stage::Stage1 ? "stage1" : "stage3"; }

std::optional<Stage> parse_stage(std::string_view text) {
  if (text == "stage1") return Stage::Stage1;
  if (text == "stage3") return Stage::Stage3;
  return std::nullopt;
}

bool TrialSet::contains(const std::string& id) const {
  return std::find(image_ids.begin(), image_ids.end(), id) != image_ids.end();
}

namespace {

TrialSet draw_trial_set(const ImagePool& pool, std::size_t test_size, std::uint64_t seed,
                        CounterRng& rng) {
  if (test_size == 0 || test_size % 2 != 0)
    throw Error(Errc::OddTestSize, "test_size must be a positive even number");
  const std::size_t per_label = test_size / 2;

  // The pool map iterates in id order.
  std::vector<std::string> real, fake;
  for (const auto& [id, entry] : pool.entries()) {
    if (!entry.record.eye_extractable) continue;
    (entry.record.label == Label::Real ? real : fake).push_back(id);
  }
  if (real.size() < per_label || fake.size() < per_label)
    throw Error(Errc::PoolTooSmall, "pool has " + std::to_string(real.size()) + " real and " +
                                        std::to_string(fake.size()) + " fake extractable images; need " +
                                        std::to_string(per_label) + " of each");

  TrialSet set;
  set.seed = seed;
  set.test_size = test_size;
  set.image_ids.reserve(test_size);
  for (auto* candidates : {&real, &fake}) {
    // Partial Fisher-Yates: the first per_label slots become a uniform sample.
    auto& c = *candidates;
    for (std::size_t i = 0; i < per_label; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(c.size() - i));
      std::swap(c[i], c[j]);
      set.image_ids.push_back(c[i]);
    }
  }
  return set;
}

}  // namespace

TrialSet sample_trial_set(const ImagePool& pool, std::size_t test_size, std::uint64_t seed) {
  CounterRng rng(seed);
  return draw_trial_set(pool, test_size, seed, rng);
}

StudySession create_session(const ImagePool& pool, std::string session_id, std::string alias,
                            const SessionConfig& config, std::string created_at) {
  // Stage 1 order continues the sampling stream; Stage 3 gets its own key.
  CounterRng rng(config.seed);
  StudySession s;
  s.trial_set = draw_trial_set(pool, config.test_size, config.seed, rng);
  s.session_id = std::move(session_id);
  s.participant_alias = std::move(alias);
  s.created_at = std::move(created_at);

  s.stage1_order.resize(s.trial_set.image_ids.size());
  std::iota(s.stage1_order.begin(), s.stage1_order.end(), std::size_t{0});
  s.stage3_order = s.stage1_order;
  shuffle_indices(s.stage1_order, rng);
  CounterRng reshuffle(config.seed ^ kStage3SeedMask);
  shuffle_indices(s.stage3_order, reshuffle);

  s.state = StageState::Stage1InProgress;
  return s;
}

std::vector<std::string> presentation_order(const StudySession& session, Stage stage) {
  const auto& order = stage == Stage::Stage1 ? session.stage1_order : session.stage3_order;
  std::vector<std::string> ids;
  ids.reserve(order.size());
  for (std::size_t i : order) ids.push_back(session.trial_set.image_ids.at(i));
  return ids;
}

std::vector<Response> responses_for(const StudySession& session, Stage stage) {
  std::vector<Response> out;
  for (const auto& r : session.responses)
    if (r.stage == stage) out.push_back(r);
  return out;
}

std::vector<std::string> missing_responses(const StudySession& session, Stage stage) {
  std::set<std::string> answered;
  for (const auto& r : session.responses)
    if (r.stage == stage) answered.insert(r.image_id);
  std::vector<std::string> missing;
  for (auto& id : presentation_order(session, stage))
    if (!answered.count(id)) missing.push_back(std::move(id));
  return missing;
}

void submit_response(StudySession& session, Stage stage, const std::string& image_id,
                     Label verdict, std::uint64_t elapsed_ms) {
  if (session.state != in_progress_state(stage)) wrong_stage(session, "submit_response");
  if (!session.trial_set.contains(image_id))
    throw Error(Errc::UnknownTrialImage, "image " + image_id + " is not in this session's trial set");
  for (const auto& r : session.responses)
    if (r.stage == stage && r.image_id == image_id)
      throw Error(Errc::DuplicateResponse, "image " + image_id + " already answered in " +
                                               std::string(to_string(stage)));
  session.responses.push_back({image_id, verdict, stage, elapsed_ms});
}

MetricsReport complete_stage(StudySession& session, const LabelMap& labels) {
  Stage stage;
  if (session.state == StageState::Stage1InProgress)
    stage = Stage::Stage1;
  else if (session.state == StageState::Stage3InProgress)
    stage = Stage::Stage3;
  else
    wrong_stage(session, "complete_stage");

  const auto missing = missing_responses(session, stage);
  if (!missing.empty()) {
    std::string detail = std::to_string(missing.size()) + " trial(s) unanswered:";
    for (const auto& id : missing) detail += " " + id;
    throw Error(Errc::IncompleteStage, detail);
  }
  const auto responses = responses_for(session, stage);
  MetricsReport report = compute_metrics(responses, labels);
  session.state = stage == Stage::Stage1 ? StageState::Stage1Complete : StageState::Complete;
  return report;
}

void begin_tutorial(StudySession& session) {
  if (session.state != StageState::Stage1Complete) wrong_stage(session, "begin_tutorial");
  session.state = StageState::TutorialInProgress;
}

void mark_course_complete(StudySession& session, const std::string& course_id,
                          std::size_t course_count) {
  if (session.state != StageState::TutorialInProgress) wrong_stage(session, "complete_course");
  session.course_progress.insert(course_id);
  if (session.course_progress.size() >= course_count) session.state = StageState::TutorialComplete;
}

void begin_stage3(StudySession& session, std::span<const std::string> required_courses) {
  if (session.state != StageState::TutorialComplete) wrong_stage(session, "begin_stage3");
  for (const auto& id : required_courses)
    if (!session.course_progress.count(id))
      throw Error(Errc::WrongStage, "course " + id + " not completed");
  session.state = StageState::Stage3InProgress;
}

MetricsReport compute_metrics(std::span<const Response> responses, const LabelMap& labels) {
  ConfusionMatrix cm;
  for (const auto& r : responses) {
    const auto it = labels.find(r.image_id);
    if (it == labels.end()) throw Error(Errc::MissingLabel, "no label for image " + r.image_id);
    const bool truth_fake = it->second == Label::Fake;
    const bool said_fake = r.verdict == Label::Fake;
    if (said_fake && truth_fake) ++cm.tp;
    else if (said_fake) ++cm.fp;
    else if (truth_fake) ++cm.fn;
    else ++cm.tn;
  }
  return metrics_from_confusion(cm);
}

MetricDeltas metric_deltas(const MetricsReport& before, const MetricsReport& after) {
  return {after.accuracy - before.accuracy, after.precision - before.precision,
          after.recall - before.recall, after.f_score - before.f_score};
}

ComparisonReport compare_stages(const StudySession& session, const LabelMap& labels) {
  if (session.state != StageState::Complete)
    throw Error(Errc::SessionNotComplete, "session " + session.session_id + " is not complete");
  const auto first = responses_for(session, Stage::Stage1);
  const auto second = responses_for(session, Stage::Stage3);
  ComparisonReport report;
  report.stage1 = compute_metrics(first, labels);
  report.stage3 = compute_metrics(second, labels);
  report.deltas = metric_deltas(report.stage1, report.stage3);

  std::map<std::string, Label> before, after;
  for (const auto& r : first) before[r.image_id] = r.verdict;
  for (const auto& r : second) after[r.image_id] = r.verdict;
  for (const auto& id : session.trial_set.image_ids) {
    const Label a = before.at(id), b = after.at(id);
    if (a != b) report.flips.push_back({id, a, b});
  }
  return report;
}

}  // namespace openeye::study
