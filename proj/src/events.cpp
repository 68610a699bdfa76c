#include "openeye/events.hpp"

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <fstream>

#include <fcntl.h>
#include <unistd.h>

#include "openeye/codec.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace openeye::service {

namespace {

constexpr std::string_view kKindNames[] = {"created", "response_submitted", "stage_completed",
                                           "course_completed"};

EventKind parse_kind(std::string_view text) {
  for (int i = 0; i < 4; ++i)
    if (kKindNames[i] == text) return static_cast<EventKind>(i);
  throw Error(Errc::StorageFailure, "unknown event kind " + std::string(text));
}

}  // namespace

std::string_view to_string(EventKind kind) { return kKindNames[static_cast<int>(kind)]; }

json SessionEvent::to_json() const {
  return {{"session_id", session_id}, {"seq", seq}, {"kind", to_string(kind)}, {"at", at},
          {"payload", payload}};
}

SessionEvent SessionEvent::from_json(const json& j) {
  SessionEvent e;
  e.session_id = j.at("session_id").get<std::string>();
  e.seq = j.at("seq").get<std::uint64_t>();
  e.kind = parse_kind(j.at("kind").get<std::string>());
  e.at = j.at("at").get<std::string>();
  e.payload = j.at("payload");
  return e;
}

bool valid_session_id(std::string_view id) {
  return id.size() == 32 && std::all_of(id.begin(), id.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

std::string now_iso8601() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[40];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

// ---- MemoryEventStore --------------------------------------------------------

void MemoryEventStore::append(const SessionEvent& event) {
  std::lock_guard lock(mutex_);
  auto& log = logs_[event.session_id];
  if (event.seq != log.size() + 1)
    throw Error(Errc::SequenceConflict, "expected seq " + std::to_string(log.size() + 1) + ", got " +
                                            std::to_string(event.seq));
  log.push_back(event);
}

std::vector<SessionEvent> MemoryEventStore::load(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = logs_.find(session_id);
  return it == logs_.end() ? std::vector<SessionEvent>{} : it->second;
}

std::vector<std::string> MemoryEventStore::sessions() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, log] : logs_)
    if (!log.empty()) ids.push_back(id);
  return ids;
}

// ---- FileEventStore ----------------------------------------------------------

struct FileEventStore::Log {
  std::mutex mutex;
  int fd = -1;
  std::uint64_t last_seq = 0;
  bool loaded = false;
};

namespace {

// Complete lines only; a torn tail has no newline.
std::vector<std::string> read_complete_lines(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::vector<std::string> lines;
  if (!in) return lines;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t start = 0;
  for (std::size_t nl; (nl = content.find('\n', start)) != std::string::npos; start = nl + 1)
    if (nl > start) lines.push_back(content.substr(start, nl - start));
  return lines;
}

// Drops a torn tail so the next append starts on a fresh line.
void truncate_torn_tail(const fs::path& file) {
  std::error_code ec;
  const auto size = fs::file_size(file, ec);
  if (ec || size == 0) return;
  std::ifstream in(file, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto nl = content.rfind('\n');
  const std::size_t keep = nl == std::string::npos ? 0 : nl + 1;
  if (keep == content.size()) return;
  if (::truncate(file.c_str(), static_cast<off_t>(keep)) != 0)
    throw Error(Errc::StorageFailure, "cannot repair " + file.string() + ": " + std::strerror(errno));
}

void write_all(int fd, const std::string& data) {
  std::size_t written = 0;
  while (written < data.size()) {
    const ssize_t n = ::write(fd, data.data() + written, data.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::StorageFailure, std::string("event write failed: ") + std::strerror(errno));
    }
    written += static_cast<std::size_t>(n);
  }
}

}  // namespace

FileEventStore::FileEventStore(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(Errc::StorageFailure, "cannot create event dir " + dir_.string());
}

FileEventStore::~FileEventStore() {
  for (auto& [id, log] : logs_)
    if (log->fd >= 0) ::close(log->fd);
}

FileEventStore::Log& FileEventStore::log_for(const std::string& session_id) {
  std::lock_guard lock(map_mutex_);
  auto& slot = logs_[session_id];
  if (!slot) slot = std::make_unique<Log>();
  return *slot;
}

void FileEventStore::append(const SessionEvent& event) {
  if (!valid_session_id(event.session_id))
    throw Error(Errc::StorageFailure, "invalid session id " + event.session_id);
  Log& log = log_for(event.session_id);
  std::lock_guard lock(log.mutex);
  const fs::path file = dir_ / (event.session_id + ".jsonl");
  if (!log.loaded) {
    truncate_torn_tail(file);
    const auto lines = read_complete_lines(file);
    log.last_seq = lines.empty() ? 0 : SessionEvent::from_json(json::parse(lines.back())).seq;
    log.loaded = true;
  }
  if (event.seq != log.last_seq + 1)
    throw Error(Errc::SequenceConflict, "expected seq " + std::to_string(log.last_seq + 1) + ", got " +
                                            std::to_string(event.seq));
  if (log.fd < 0) {
    log.fd = ::open(file.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (log.fd < 0)
      throw Error(Errc::StorageFailure, "cannot open " + file.string() + ": " + std::strerror(errno));
  }
  write_all(log.fd, event.to_json().dump() + "\n");
  if (::fsync(log.fd) != 0)
    throw Error(Errc::StorageFailure, std::string("fsync failed: ") + std::strerror(errno));
  log.last_seq = event.seq;
}

std::vector<SessionEvent> FileEventStore::load(const std::string& session_id) const {
  if (!valid_session_id(session_id)) return {};
  std::vector<SessionEvent> events;
  for (const auto& line : read_complete_lines(dir_ / (session_id + ".jsonl"))) {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(Errc::StorageFailure, "corrupt event log for " + session_id + ": " + e.what());
    }
    SessionEvent e = SessionEvent::from_json(j);
    if (e.seq != events.size() + 1)
      throw Error(Errc::SequenceConflict, "gap in event log for " + session_id);
    events.push_back(std::move(e));
  }
  return events;
}

std::vector<std::string> FileEventStore::sessions() const {
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir_)) {
    if (entry.path().extension() != ".jsonl") continue;
    const std::string id = entry.path().stem().string();
    if (valid_session_id(id)) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

// ---- replay ------------------------------------------------------------------

json created_payload(const study::StudySession& s) {
  return {{"alias", s.participant_alias},
          {"created_at", s.created_at},
          {"trial_set", codec::trial_set_json(s.trial_set)},
          {"stage1_order", s.stage1_order},
          {"stage3_order", s.stage3_order}};
}

void apply_event(study::StudySession& session, const SessionEvent& event, const ReplayContext& ctx) {
  try {
    switch (event.kind) {
      case EventKind::Created: {
        if (session.state != study::StageState::Created)
          throw Error(Errc::WrongStage, "session already created");
        study::StudySession s;
        s.session_id = event.session_id;
        s.participant_alias = event.payload.at("alias").get<std::string>();
        s.created_at = event.payload.at("created_at").get<std::string>();
        s.trial_set = codec::trial_set_from(event.payload.at("trial_set"));
        s.stage1_order = event.payload.at("stage1_order").get<std::vector<std::size_t>>();
        s.stage3_order = event.payload.at("stage3_order").get<std::vector<std::size_t>>();
        s.state = study::StageState::Stage1InProgress;
        session = std::move(s);
        break;
      }
      case EventKind::ResponseSubmitted: {
        const study::Response r = codec::response_from(event.payload);
        study::submit_response(session, r.stage, r.image_id, r.verdict, r.elapsed_ms);
        break;
      }
      case EventKind::StageCompleted: {
        const auto stage = study::parse_stage(event.payload.at("stage").get<std::string>());
        const auto expected = session.state == study::StageState::Stage1InProgress
                                  ? study::Stage::Stage1
                                  : study::Stage::Stage3;
        if (!stage || *stage != expected) throw Error(Errc::WrongStage, "stage mismatch");
        study::StudySession next = session;
        study::complete_stage(next, ctx.labels);
        if (next.state == study::StageState::Stage1Complete) study::begin_tutorial(next);
        session = std::move(next);
        break;
      }
      case EventKind::CourseCompleted: {
        study::StudySession next = session;
        tutorial::record_progress(next, ctx.courses, event.payload.at("course_id").get<std::string>());
        if (next.state == study::StageState::TutorialComplete) {
          const auto ids = ctx.courses.course_ids();
          study::begin_stage3(next, ids);
        }
        session = std::move(next);
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::BadRequest, std::string("malformed event payload: ") + e.what());
  }
}

study::StudySession replay(const std::vector<SessionEvent>& events, const ReplayContext& ctx) {
  study::StudySession session;
  for (const auto& e : events) apply_event(session, e, ctx);
  return session;
}

}  // namespace openeye::service
