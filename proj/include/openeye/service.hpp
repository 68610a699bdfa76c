#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "openeye/aggregate.hpp"
#include "openeye/events.hpp"
#include "openeye/extractor.hpp"
#include "openeye/image_pool.hpp"
#include "openeye/study.hpp"
#include "openeye/tutorial.hpp"

namespace openeye::service {

struct HttpRequest {
  std::string method;
  std::string path;  // without query string
  std::string body;
  std::string authorization;  // raw Authorization header
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

struct ServiceOptions {
  std::size_t test_size = study::kDefaultTestSize;
  int dilation = pupil::kDefaultDilation;
  std::string admin_token;  // empty disables every admin endpoint
  const pupil::PupilExtractor* extractor = nullptr;  // used by admin ingest
  std::filesystem::path exhibit_dir;
};

/// HTTP status for an error code.
int http_status(Errc code);

/// Orchestrates sessions over an immutable pool snapshot, a course manifest
/// and an event store. Requests on one session are serialized by that
/// session's lock; distinct sessions proceed concurrently. Every mutation is
/// persisted before it becomes visible.
class StudyService {
 public:
  StudyService(ServiceOptions options, std::shared_ptr<const ImagePool> pool,
               tutorial::CourseManifest courses, EventStore& store);

  /// Rebuilds every session from the event store. Returns the count.
  std::size_t recover();

  HttpResponse handle(const HttpRequest& request);

  // Typed operations behind the endpoints. They throw openeye::Error.
  nlohmann::json create_session(const std::string& alias, std::optional<std::uint64_t> seed = {});
  nlohmann::json session_summary(const std::string& session_id) const;
  /// nullopt when the current stage has no unanswered trials.
  std::optional<nlohmann::json> next_trial(const std::string& session_id) const;
  nlohmann::json submit_response(const std::string& session_id, const std::string& image_id,
                                 Label verdict, std::uint64_t elapsed_ms);
  nlohmann::json complete_stage(const std::string& session_id);
  nlohmann::json courses_json() const;
  nlohmann::json complete_course(const std::string& session_id, const std::string& course_id);
  nlohmann::json report(const std::string& session_id) const;

  nlohmann::json admin_ingest(const std::filesystem::path& manifest_path);
  AggregateReport aggregate_report() const;
  /// One completed session per line, ordered by session id.
  std::string export_jsonl() const;

  std::optional<study::StudySession> snapshot(const std::string& session_id) const;
  std::vector<std::string> session_ids() const;
  std::shared_ptr<const ImagePool> pool() const;
  study::LabelMap labels() const;
  const tutorial::CourseManifest& courses() const noexcept { return courses_; }

 private:
  struct Slot {
    mutable std::mutex mutex;
    study::StudySession session;
    std::uint64_t last_seq = 0;
  };
  struct PoolState {
    std::shared_ptr<const ImagePool> pool;
    std::shared_ptr<const study::LabelMap> labels;
  };

  std::shared_ptr<Slot> slot(const std::string& session_id) const;
  PoolState pool_state() const;
  /// Builds the event from the locked session, applies it to a copy, persists
  /// it, then publishes the copy.
  study::StudySession mutate(const std::string& session_id, EventKind kind,
                             const std::function<nlohmann::json(const study::StudySession&)>& payload);
  HttpResponse dispatch(const HttpRequest& request);
  bool admin_authorized(const HttpRequest& request) const;

  ServiceOptions options_;
  tutorial::CourseManifest courses_;
  EventStore& store_;

  mutable std::shared_mutex pool_mutex_;
  PoolState pool_state_;
  std::mutex ingest_mutex_;

  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

/// 128 random bits as 32 lowercase hex characters.
std::string random_session_id();
std::uint64_t random_seed();

}  // namespace openeye::service
