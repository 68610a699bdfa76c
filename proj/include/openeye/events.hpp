#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "openeye/study.hpp"
#include "openeye/tutorial.hpp"

namespace openeye::service {

enum class EventKind { Created, ResponseSubmitted, StageCompleted, CourseCompleted };

std::string_view to_string(EventKind kind);

struct SessionEvent {
  std::string session_id;
  std::uint64_t seq = 0;  // 1-based, gapless per session
  EventKind kind = EventKind::Created;
  nlohmann::json payload;
  std::string at;  // ISO-8601 UTC

  nlohmann::json to_json() const;
  static SessionEvent from_json(const nlohmann::json& j);
};

/// Append-only per-session event log.
class EventStore {
 public:
  virtual ~EventStore() = default;
  /// Durable before returning. Throws SequenceConflict unless event.seq is
  /// one past the session's last seq, StorageFailure on I/O errors.
  virtual void append(const SessionEvent& event) = 0;
  virtual std::vector<SessionEvent> load(const std::string& session_id) const = 0;
  virtual std::vector<std::string> sessions() const = 0;
};

class MemoryEventStore final : public EventStore {
 public:
  void append(const SessionEvent& event) override;
  std::vector<SessionEvent> load(const std::string& session_id) const override;
  std::vector<std::string> sessions() const override;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::vector<SessionEvent>> logs_;
};

/// One JSON Lines file per session under `dir`, fsync'd on every append. A
/// trailing line without its newline is a torn write and is ignored on load.
class FileEventStore final : public EventStore {
 public:
  explicit FileEventStore(std::filesystem::path dir);
  ~FileEventStore() override;

  void append(const SessionEvent& event) override;
  std::vector<SessionEvent> load(const std::string& session_id) const override;
  std::vector<std::string> sessions() const override;

 private:
  struct Log;
  Log& log_for(const std::string& session_id);

  std::filesystem::path dir_;
  std::mutex map_mutex_;
  std::map<std::string, std::unique_ptr<Log>> logs_;
};

/// Session ids are 32 lowercase hex characters.
bool valid_session_id(std::string_view id);

std::string now_iso8601();

/// Everything event application needs beyond the session itself.
struct ReplayContext {
  const study::LabelMap& labels;
  const tutorial::CourseManifest& courses;
};

/// Applies one event with the same engine operations the live service uses,
/// including the automatic Stage1Complete -> TutorialInProgress and
/// TutorialComplete -> Stage3InProgress steps. Validates before mutating.
void apply_event(study::StudySession& session, const SessionEvent& event, const ReplayContext& ctx);

study::StudySession replay(const std::vector<SessionEvent>& events, const ReplayContext& ctx);

/// Payload of the Created event for a freshly sampled session.
nlohmann::json created_payload(const study::StudySession& session);

}  // namespace openeye::service
