#include "openeye/service.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include <openssl/crypto.h>
#include <openssl/rand.h>

#include "openeye/codec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace openeye::service {

std::string random_session_id() {
  unsigned char bytes[16];
  if (RAND_bytes(bytes, sizeof bytes) != 1) throw Error(Errc::StorageFailure, "RAND_bytes failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned char b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

std::uint64_t random_seed() {
  std::uint64_t seed = 0;
  if (RAND_bytes(reinterpret_cast<unsigned char*>(&seed), sizeof seed) != 1)
    throw Error(Errc::StorageFailure, "RAND_bytes failed");
  return seed;
}

int http_status(Errc code) {
  switch (code) {
    case Errc::BadRequest:
    case Errc::BadLabel:
    case Errc::UnknownTrialImage:
    case Errc::OddTestSize:
    case Errc::ManifestUnreadable:
    case Errc::BadManifest:
      return 400;
    case Errc::Forbidden:
      return 403;
    case Errc::UnknownSession:
    case Errc::UnknownImage:
    case Errc::UnknownCourse:
    case Errc::MissingExhibit:
      return 404;
    case Errc::WrongStage:
    case Errc::DuplicateResponse:
    case Errc::OutOfOrderCourse:
    case Errc::IncompleteStage:
    case Errc::SessionNotComplete:
    case Errc::PoolTooSmall:
    case Errc::SequenceConflict:
      return 409;
    default:
      return 500;
  }
}

StudyService::StudyService(ServiceOptions options, std::shared_ptr<const ImagePool> pool,
                           tutorial::CourseManifest courses, EventStore& store)
    : options_(std::move(options)), courses_(std::move(courses)), store_(store) {
  auto labels = std::make_shared<const study::LabelMap>(pool->labels());
  pool_state_ = {std::move(pool), std::move(labels)};
}

StudyService::PoolState StudyService::pool_state() const {
  std::shared_lock lock(pool_mutex_);
  return pool_state_;
}

std::shared_ptr<const ImagePool> StudyService::pool() const { return pool_state().pool; }

study::LabelMap StudyService::labels() const { return *pool_state().labels; }

std::shared_ptr<StudyService::Slot> StudyService::slot(const std::string& session_id) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error(Errc::UnknownSession, "unknown session " + session_id);
  return it->second;
}

std::size_t StudyService::recover() {
  const PoolState ps = pool_state();
  const ReplayContext ctx{*ps.labels, courses_};
  std::size_t n = 0;
  for (const auto& id : store_.sessions()) {
    const auto events = store_.load(id);
    if (events.empty()) continue;
    auto s = std::make_shared<Slot>();
    s->session = replay(events, ctx);
    s->last_seq = events.back().seq;
    std::unique_lock lock(sessions_mutex_);
    sessions_[id] = std::move(s);
    ++n;
  }
  return n;
}

study::StudySession StudyService::mutate(const std::string& session_id, EventKind kind,
                                         const std::function<json(const study::StudySession&)>& payload) {
  const auto s = slot(session_id);
  const PoolState ps = pool_state();
  std::lock_guard lock(s->mutex);
  SessionEvent event{session_id, s->last_seq + 1, kind, payload(s->session), now_iso8601()};
  study::StudySession next = s->session;
  apply_event(next, event, {*ps.labels, courses_});
  store_.append(event);
  s->session = next;
  s->last_seq = event.seq;
  return next;
}

json StudyService::create_session(const std::string& alias, std::optional<std::uint64_t> seed) {
  const PoolState ps = pool_state();
  std::string id;
  do {
    id = random_session_id();
  } while (snapshot(id).has_value());
  const study::StudySession fresh = study::create_session(
      *ps.pool, id, alias, {options_.test_size, seed.value_or(random_seed())}, now_iso8601());

  const SessionEvent event{id, 1, EventKind::Created, created_payload(fresh), fresh.created_at};
  auto s = std::make_shared<Slot>();
  apply_event(s->session, event, {*ps.labels, courses_});
  store_.append(event);
  s->last_seq = 1;
  {
    std::unique_lock lock(sessions_mutex_);
    sessions_[id] = s;
  }
  return {{"session_id", id}, {"state", study::to_string(s->session.state)},
          {"test_size", s->session.trial_set.test_size}};
}

std::optional<study::StudySession> StudyService::snapshot(const std::string& session_id) const {
  std::shared_ptr<Slot> s;
  {
    std::shared_lock lock(sessions_mutex_);
    const auto it = sessions_.find(session_id);
    if (it == sessions_.end()) return std::nullopt;
    s = it->second;
  }
  std::lock_guard lock(s->mutex);
  return s->session;
}

std::vector<std::string> StudyService::session_ids() const {
  std::shared_lock lock(sessions_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

namespace {

std::optional<study::Stage> active_stage(const study::StudySession& s) {
  if (s.state == study::StageState::Stage1InProgress) return study::Stage::Stage1;
  if (s.state == study::StageState::Stage3InProgress) return study::Stage::Stage3;
  return std::nullopt;
}

std::size_t answered(const study::StudySession& s, study::Stage stage) {
  return static_cast<std::size_t>(std::count_if(s.responses.begin(), s.responses.end(),
                                                [&](const study::Response& r) { return r.stage == stage; }));
}

json progress_json(const study::StudySession& s) {
  const std::size_t total = s.trial_set.image_ids.size();
  return {{"stage1", {{"answered", answered(s, study::Stage::Stage1)}, {"total", total}}},
          {"stage3", {{"answered", answered(s, study::Stage::Stage3)}, {"total", total}}}};
}

json ordered_progress(const study::StudySession& s, const tutorial::CourseManifest& courses) {
  json done = json::array();
  for (const auto& c : courses.courses)
    if (s.course_progress.count(c.course_id)) done.push_back(c.course_id);
  return done;
}

}  // namespace

json StudyService::session_summary(const std::string& session_id) const {
  const auto s = snapshot(session_id);
  if (!s) throw Error(Errc::UnknownSession, "unknown session " + session_id);
  const auto stage = active_stage(*s);
  return {{"session_id", s->session_id},
          {"alias", s->participant_alias},
          {"state", study::to_string(s->state)},
          {"test_size", s->trial_set.test_size},
          {"stage", stage ? json(study::to_string(*stage)) : json(nullptr)},
          {"progress", progress_json(*s)},
          {"course_progress", ordered_progress(*s, courses_)},
          {"courses_total", courses_.courses.size()},
          {"created_at", s->created_at}};
}

std::optional<json> StudyService::next_trial(const std::string& session_id) const {
  const auto s = snapshot(session_id);
  if (!s) throw Error(Errc::UnknownSession, "unknown session " + session_id);
  const auto stage = active_stage(*s);
  if (!stage) throw Error(Errc::WrongStage, "no test stage in progress");
  const auto missing = study::missing_responses(*s, *stage);
  if (missing.empty()) return std::nullopt;
  return json{{"image_id", missing.front()},
              {"index", answered(*s, *stage)},
              {"total", s->trial_set.image_ids.size()},
              {"stage", study::to_string(*stage)}};
}

json StudyService::submit_response(const std::string& session_id, const std::string& image_id,
                                   Label verdict, std::uint64_t elapsed_ms) {
  const auto next = mutate(session_id, EventKind::ResponseSubmitted, [&](const study::StudySession& s) {
    const auto stage = active_stage(s);
    if (!stage) throw Error(Errc::WrongStage, "no test stage in progress");
    return codec::response_json({image_id, verdict, *stage, elapsed_ms});
  });
  const auto stage = active_stage(next).value();
  return {{"answered", answered(next, stage)},
          {"total", next.trial_set.image_ids.size()},
          {"stage", study::to_string(stage)},
          {"state", study::to_string(next.state)}};
}

json StudyService::complete_stage(const std::string& session_id) {
  study::Stage stage = study::Stage::Stage1;
  const auto next = mutate(session_id, EventKind::StageCompleted, [&](const study::StudySession& s) {
    const auto active = active_stage(s);
    if (!active) throw Error(Errc::WrongStage, "no test stage in progress");
    stage = *active;
    return json{{"stage", study::to_string(stage)}};
  });
  const PoolState ps = pool_state();
  const auto responses = study::responses_for(next, stage);
  json out = codec::metrics_json(study::compute_metrics(responses, *ps.labels));
  out["stage"] = study::to_string(stage);
  out["state"] = study::to_string(next.state);
  return out;
}

json StudyService::courses_json() const {
  json list = json::array();
  for (const auto& c : courses_.courses) {
    json blocks = json::array();
    for (const auto& b : c.blocks) {
      if (b.kind == tutorial::BlockKind::Text)
        blocks.push_back({{"kind", "text"}, {"text", b.text}});
      else
        blocks.push_back({{"kind", "exhibit"}, {"exhibit_ref", b.exhibit_ref}, {"text", b.text}});
    }
    list.push_back({{"course_id", c.course_id}, {"order_index", c.order_index}, {"title", c.title},
                    {"blocks", blocks}});
  }
  return {{"courses", list}};
}

json StudyService::complete_course(const std::string& session_id, const std::string& course_id) {
  if (!courses_.find(course_id)) throw Error(Errc::UnknownCourse, "unknown course " + course_id);
  auto current = snapshot(session_id);
  if (!current) throw Error(Errc::UnknownSession, "unknown session " + session_id);
  if (!current->course_progress.count(course_id)) {
    current = mutate(session_id, EventKind::CourseCompleted, [&](const study::StudySession& s) {
      if (s.state != study::StageState::TutorialInProgress)
        throw Error(Errc::WrongStage, "tutorial is not in progress");
      return json{{"course_id", course_id}};
    });
  }
  return {{"course_progress", ordered_progress(*current, courses_)},
          {"courses_total", courses_.courses.size()},
          {"state", study::to_string(current->state)}};
}

json StudyService::report(const std::string& session_id) const {
  const auto s = snapshot(session_id);
  if (!s) throw Error(Errc::UnknownSession, "unknown session " + session_id);
  const PoolState ps = pool_state();
  return codec::comparison_json(study::compare_stages(*s, *ps.labels));
}

json StudyService::admin_ingest(const fs::path& manifest_path) {
  std::lock_guard lock(ingest_mutex_);
  const PoolState current = pool_state();
  auto next = std::make_shared<ImagePool>(*current.pool);
  IngestOptions opts;
  opts.extractor = options_.extractor;
  opts.dilation = options_.dilation;
  if (!options_.exhibit_dir.empty()) opts.exhibit_dir = options_.exhibit_dir;
  const IngestReport report = ingest_manifest(manifest_path, *next, opts);
  auto labels = std::make_shared<const study::LabelMap>(next->labels());
  {
    std::unique_lock write(pool_mutex_);
    pool_state_ = {std::move(next), std::move(labels)};
  }
  json out = codec::ingest_report_json(report);
  out["validation"] = codec::validation_json(validate_pool(*pool(), options_.test_size));
  return out;
}

AggregateReport StudyService::aggregate_report() const {
  std::vector<study::StudySession> all;
  for (const auto& id : session_ids())
    if (auto s = snapshot(id)) all.push_back(std::move(*s));
  return aggregate(all, *pool_state().labels);
}

std::string StudyService::export_jsonl() const {
  const PoolState ps = pool_state();
  std::string out;
  for (const auto& id : session_ids()) {
    const auto s = snapshot(id);
    if (!s || s->state != study::StageState::Complete) continue;
    out += codec::completed_session_json(*s, study::compare_stages(*s, *ps.labels)).dump();
    out += '\n';
  }
  return out;
}

// ---- HTTP routing ------------------------------------------------------------

namespace {

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream in(path);
  while (std::getline(in, part, '/'))
    if (!part.empty()) parts.push_back(part);
  return parts;
}

HttpResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

HttpResponse error_response(int status, std::string_view code, const std::string& detail) {
  return json_response(status, {{"error", code}, {"detail", detail}});
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::BadRequest, "body must be a JSON object");
  return j;
}

bool safe_token(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

}  // namespace

bool StudyService::admin_authorized(const HttpRequest& request) const {
  if (options_.admin_token.empty()) return false;
  const std::string expected = "Bearer " + options_.admin_token;
  return request.authorization.size() == expected.size() &&
         CRYPTO_memcmp(request.authorization.data(), expected.data(), expected.size()) == 0;
}

HttpResponse StudyService::handle(const HttpRequest& request) {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    return error_response(http_status(e.code()), to_string(e.code()), e.what());
  } catch (const json::exception& e) {
    return error_response(400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "InternalError", e.what());
  }
}

HttpResponse StudyService::dispatch(const HttpRequest& request) {
  const auto parts = split_path(request.path);
  const std::string& method = request.method;
  const std::size_t n = parts.size();
  auto is = [&](std::initializer_list<const char*> pattern) {
    if (pattern.size() != n) return false;
    std::size_t i = 0;
    for (const char* p : pattern) {
      if (std::string_view(p) != "*" && parts[i] != p) return false;
      ++i;
    }
    return true;
  };
  if (n == 0 || parts[0] != "api") return error_response(404, "NotFound", "no such endpoint");

  if (is({"api", "sessions"}) && method == "POST") {
    const json body = parse_body(request.body);
    const std::string alias = body.contains("alias") && body["alias"].is_string() ? body["alias"].get<std::string>() : "";
    return json_response(201, create_session(alias));
  }
  if (is({"api", "sessions", "*"}) && method == "GET") return json_response(200, session_summary(parts[2]));
  if (is({"api", "sessions", "*", "trials", "next"}) && method == "GET") {
    const auto next = next_trial(parts[2]);
    if (!next) return {204, "application/json", ""};
    return json_response(200, *next);
  }
  if (is({"api", "images", "*"}) && method == "GET") {
    auto [bytes, record] = get_image(*pool(), parts[2]);
    return {200, std::string(content_type(sniff_format(bytes))), std::string(bytes.begin(), bytes.end())};
  }
  if (is({"api", "exhibits", "*"}) && method == "GET") {
    if (!safe_token(parts[2]) || options_.exhibit_dir.empty())
      throw Error(Errc::MissingExhibit, "unknown exhibit");
    const fs::path file = tutorial::exhibit_path(options_.exhibit_dir, parts[2]);
    if (!fs::is_regular_file(file)) throw Error(Errc::MissingExhibit, "unknown exhibit " + parts[2]);
    const Bytes bytes = read_file(file);
    return {200, "image/png", std::string(bytes.begin(), bytes.end())};
  }
  if (is({"api", "sessions", "*", "responses"}) && method == "POST") {
    const json body = parse_body(request.body);
    if (!body.contains("image_id") || !body["image_id"].is_string())
      throw Error(Errc::BadRequest, "image_id required");
    const auto verdict = body.contains("verdict") && body["verdict"].is_string()
                             ? parse_label(body["verdict"].get<std::string>())
                             : std::nullopt;
    if (!verdict) throw Error(Errc::BadRequest, "verdict must be \"real\" or \"fake\"");
    const auto& elapsed = body.contains("elapsed_ms") ? body["elapsed_ms"] : json(0);
    if (!elapsed.is_number_integer() || elapsed.get<std::int64_t>() < 0)
      throw Error(Errc::BadRequest, "elapsed_ms must be a nonnegative integer");
    return json_response(200, submit_response(parts[2], body["image_id"].get<std::string>(), *verdict,
                                              elapsed.get<std::uint64_t>()));
  }
  if (is({"api", "sessions", "*", "stage", "complete"}) && method == "POST")
    return json_response(200, complete_stage(parts[2]));
  if (is({"api", "tutorial", "courses"}) && method == "GET") return json_response(200, courses_json());
  if (is({"api", "sessions", "*", "tutorial", "*", "complete"}) && method == "POST")
    return json_response(200, complete_course(parts[2], parts[4]));
  if (is({"api", "sessions", "*", "report"}) && method == "GET") return json_response(200, report(parts[2]));

  if (n >= 2 && parts[1] == "admin") {
    if (!admin_authorized(request)) throw Error(Errc::Forbidden, "admin token required");
    if (is({"api", "admin", "ingest"}) && method == "POST") {
      const json body = parse_body(request.body);
      if (!body.contains("manifest_path") || !body["manifest_path"].is_string())
        throw Error(Errc::BadRequest, "manifest_path required");
      return json_response(200, admin_ingest(body["manifest_path"].get<std::string>()));
    }
    if (is({"api", "admin", "aggregate"}) && method == "GET")
      return json_response(200, aggregate_json(aggregate_report()));
    if (is({"api", "admin", "export"}) && method == "GET")
      return {200, "application/x-ndjson", export_jsonl()};
  }
  return error_response(404, "NotFound", "no such endpoint");
}

}  // namespace openeye::service
