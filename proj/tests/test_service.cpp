#include <doctest.h>

#include <atomic>
#include <latch>
#include <set>
#include <thread>

#include <httplib.h>

#include "deployment.hpp"
#include "leak_scan.hpp"
#include "openeye/codec.hpp"
#include "openeye/error.hpp"
#include "openeye/http_server.hpp"
#include "openeye/service.hpp"

using namespace openeye;
using namespace openeye::service;
using nlohmann::json;

namespace {

const std::string kToken = "s3cret-token";

struct Fixture {
  std::unique_ptr<testing::Deployment> deploy = testing::make_deployment(12, 12);
  MemoryEventStore store;
  std::unique_ptr<StudyService> svc;

  Fixture() {
    ServiceOptions opts;
    opts.admin_token = kToken;
    opts.exhibit_dir = deploy->exhibits();
    svc = std::make_unique<StudyService>(opts, deploy->pool, deploy->courses, store);
  }

  HttpResponse call(const std::string& method, const std::string& path, const json& body = nullptr,
                    const std::string& auth = "") {
    return svc->handle({method, path, body.is_null() ? "" : body.dump(), auth});
  }
};

}  // namespace

TEST_CASE("status mapping") {
  CHECK(http_status(Errc::BadRequest) == 400);
  CHECK(http_status(Errc::Forbidden) == 403);
  CHECK(http_status(Errc::UnknownSession) == 404);
  CHECK(http_status(Errc::UnknownImage) == 404);
  CHECK(http_status(Errc::WrongStage) == 409);
  CHECK(http_status(Errc::DuplicateResponse) == 409);
  CHECK(http_status(Errc::OutOfOrderCourse) == 409);
  CHECK(http_status(Errc::StorageFailure) == 500);
}

TEST_CASE("scripted happy path without label leaks") {
  Fixture f;
  std::vector<std::string> leaks;
  auto record = [&](const HttpResponse& r, const std::string& where) {
    if (r.content_type == "application/json" && !r.body.empty())
      testing::scan_for_leaks(json::parse(r.body), where, leaks);
    return r;
  };

  auto created = record(f.call("POST", "/api/sessions", {{"alias", "p1"}}), "create");
  REQUIRE(created.status == 201);
  const json cj = json::parse(created.body);
  const std::string id = cj.at("session_id");
  CHECK(valid_session_id(id));
  CHECK(cj.at("state") == "stage1_in_progress");
  CHECK(cj.at("test_size") == 20);
  const std::string base = "/api/sessions/" + id;

  auto early = f.call("GET", base + "/report");
  CHECK(early.status == 409);
  CHECK(json::parse(early.body).at("error") == "SessionNotComplete");

  const auto labels = f.deploy->pool->labels();
  std::vector<std::string> stage1_images;
  auto run_stage = [&](const std::string& stage, bool truthful) {
    for (std::size_t i = 0;; ++i) {
      record(f.call("GET", base), "summary");
      const auto next = record(f.call("GET", base + "/trials/next"), "next");
      if (next.status == 204) {
        CHECK(i == 20);
        CHECK(next.body.empty());
        break;
      }
      REQUIRE(next.status == 200);
      const json nj = json::parse(next.body);
      CHECK(nj.at("index") == i);
      CHECK(nj.at("total") == 20);
      CHECK(nj.at("stage") == stage);
      const std::string img = nj.at("image_id");
      stage1_images.push_back(img);
      const auto bytes = f.call("GET", "/api/images/" + img);
      REQUIRE(bytes.status == 200);
      CHECK(bytes.content_type == "image/png");
      const std::string verdict = truthful ? std::string(to_string(labels.at(img))) : "real";
      const auto sub = record(
          f.call("POST", base + "/responses", {{"image_id", img}, {"verdict", verdict}, {"elapsed_ms", 100 + i}}),
          "respond");
      REQUIRE(sub.status == 200);
      CHECK(json::parse(sub.body).at("answered") == i + 1);
    }
    const auto done = record(f.call("POST", base + "/stage/complete"), "complete");
    REQUIRE(done.status == 200);
    return json::parse(done.body);
  };

  const json m1 = run_stage("stage1", false);
  CHECK(m1.at("accuracy") == doctest::Approx(0.5));
  CHECK(json::parse(f.call("GET", base).body).at("state") == "tutorial_in_progress");

  const json courses = json::parse(record(f.call("GET", "/api/tutorial/courses"), "courses").body);
  REQUIRE(courses.at("courses").size() == 3);
  CHECK(f.call("GET", base + "/trials/next").status == 409);
  const std::string last_id = courses["courses"][2]["course_id"];
  CHECK(f.call("POST", base + "/tutorial/" + last_id + "/complete").status == 409);
  CHECK(f.call("POST", base + "/tutorial/nope/complete").status == 404);
  for (const auto& c : courses["courses"]) {
    for (const auto& b : c.at("blocks"))
      if (b.at("kind") == "exhibit") {
        const auto ex = f.call("GET", "/api/exhibits/" + b.at("exhibit_ref").get<std::string>());
        CHECK(ex.status == 200);
        CHECK(ex.content_type == "image/png");
      }
    const auto r = record(f.call("POST", base + "/tutorial/" + c.at("course_id").get<std::string>() + "/complete"),
                          "course");
    REQUIRE(r.status == 200);
  }
  CHECK(json::parse(f.call("GET", base).body).at("state") == "stage3_in_progress");

  const std::vector<std::string> first = stage1_images;
  stage1_images.clear();
  const json m3 = run_stage("stage3", true);
  CHECK(m3.at("accuracy") == 1.0);
  CHECK(std::multiset<std::string>(first.begin(), first.end()) ==
        std::multiset<std::string>(stage1_images.begin(), stage1_images.end()));

  CHECK(leaks.empty());
  for (const auto& l : leaks) MESSAGE(l);

  const auto rep = f.call("GET", base + "/report");
  REQUIRE(rep.status == 200);
  const json rj = json::parse(rep.body);
  CHECK(rj.at("stage1").at("accuracy") == doctest::Approx(0.5));
  CHECK(rj.at("stage3").at("accuracy") == 1.0);
  CHECK(rj.at("deltas").at("accuracy") == doctest::Approx(0.5));
  CHECK(rj.at("flips").size() == 10);
}

TEST_CASE("request validation and unknown resources") {
  Fixture f;
  const std::string id = json::parse(f.call("POST", "/api/sessions", json::object()).body).at("session_id");
  const std::string base = "/api/sessions/" + id;
  const std::string img = json::parse(f.call("GET", base + "/trials/next").body).at("image_id");
  CHECK(f.call("POST", base + "/responses", {{"image_id", img}, {"verdict", "maybe"}}).status == 400);
  CHECK(f.call("POST", base + "/responses", {{"image_id", img}, {"verdict", "fake"}, {"elapsed_ms", -1}}).status ==
        400);
  CHECK(f.svc->handle({"POST", base + "/responses", "{not json", ""}).status == 400);
  CHECK(f.call("POST", base + "/responses", {{"image_id", std::string(64, '0')}, {"verdict", "fake"}}).status == 400);
  CHECK(f.call("POST", base + "/stage/complete").status == 409);
  CHECK(f.call("GET", "/api/sessions/" + std::string(32, '0')).status == 404);
  CHECK(f.call("GET", "/api/images/" + std::string(64, '0')).status == 404);
  CHECK(f.call("GET", "/api/exhibits/..%2Fetc").status == 404);
  const auto nf = f.call("GET", "/api/nothing");
  CHECK(nf.status == 404);
  const json err = json::parse(nf.body);
  CHECK(err.contains("error"));
  CHECK(err.contains("detail"));
  CHECK(f.call("POST", base + "/responses", {{"image_id", img}, {"verdict", "fake"}}).status == 200);
  const auto dup = f.call("POST", base + "/responses", {{"image_id", img}, {"verdict", "real"}});
  CHECK(dup.status == 409);
  CHECK(json::parse(dup.body).at("error") == "DuplicateResponse");
}

TEST_CASE("concurrent duplicate posts are linearized") {
  Fixture f;
  for (int round = 0; round < 20; ++round) {
    const std::string id = json::parse(f.call("POST", "/api/sessions", json::object()).body).at("session_id");
    const std::string base = "/api/sessions/" + id;
    const std::string img = json::parse(f.call("GET", base + "/trials/next").body).at("image_id");
    std::latch start(2);
    std::atomic<int> ok{0}, conflict{0};
    auto post = [&] {
      start.arrive_and_wait();
      const auto r = f.call("POST", base + "/responses", {{"image_id", img}, {"verdict", "fake"}});
      if (r.status == 200) ++ok;
      if (r.status == 409) ++conflict;
    };
    std::thread a(post), b(post);
    a.join();
    b.join();
    CHECK(ok == 1);
    CHECK(conflict == 1);
    CHECK(f.svc->snapshot(id)->responses.size() == 1);
    CHECK(f.store.load(id).size() == 2);
  }
}

TEST_CASE("admin endpoints require the bearer token") {
  Fixture f;
  CHECK(f.call("GET", "/api/admin/aggregate").status == 403);
  CHECK(f.call("GET", "/api/admin/export", nullptr, "Bearer wrong").status == 403);
  CHECK(f.call("GET", "/api/admin/export", nullptr, kToken).status == 403);
  const auto agg = f.call("GET", "/api/admin/aggregate", nullptr, "Bearer " + kToken);
  REQUIRE(agg.status == 200);
  CHECK(json::parse(agg.body).at("n_sessions") == 0);
  const auto exp = f.call("GET", "/api/admin/export", nullptr, "Bearer " + kToken);
  CHECK(exp.status == 200);
  CHECK(exp.body.empty());

  const auto ing = f.call("POST", "/api/admin/ingest", {{"manifest_path", f.deploy->corpus.manifest.string()}},
                          "Bearer " + kToken);
  REQUIRE(ing.status == 200);
  const json ij = json::parse(ing.body);
  CHECK(ij.dump().find("\"valid\":true") != std::string::npos);

  MemoryEventStore other;
  StudyService locked({}, f.deploy->pool, f.deploy->courses, other);
  CHECK(locked.handle({"GET", "/api/admin/aggregate", "", "Bearer "}).status == 403);
}

TEST_CASE("export lists completed sessions only") {
  Fixture f;
  const auto labels = f.deploy->pool->labels();
  auto finish = [&](const std::string& id) {
    for (const auto& img : study::presentation_order(*f.svc->snapshot(id), study::Stage::Stage1))
      f.svc->submit_response(id, img, Label::Real, 1);
    f.svc->complete_stage(id);
    for (const auto& c : f.deploy->courses.course_ids()) f.svc->complete_course(id, c);
    for (const auto& img : study::presentation_order(*f.svc->snapshot(id), study::Stage::Stage3))
      f.svc->submit_response(id, img, labels.at(img), 1);
    f.svc->complete_stage(id);
  };
  const std::string a = f.svc->create_session("a").at("session_id");
  const std::string b = f.svc->create_session("b").at("session_id");
  f.svc->create_session("c");
  finish(a);
  finish(b);
  const std::string out = f.svc->export_jsonl();
  std::vector<json> lines;
  std::size_t pos = 0;
  while (pos < out.size()) {
    const auto nl = out.find('\n', pos);
    lines.push_back(json::parse(out.substr(pos, nl - pos)));
    pos = nl + 1;
  }
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].at("session_id") < lines[1].at("session_id"));
  for (const char* key : {"session_id", "alias", "trial_set", "responses", "stage1_metrics", "stage3_metrics",
                          "deltas", "flips"})
    CHECK(lines[0].contains(key));
  CHECK(lines[0].at("responses").size() == 40);
  // Completing an already completed course is a no-op without a new event.
  const auto before = f.store.load(a).size();
  CHECK(f.svc->complete_course(a, f.deploy->courses.course_ids().front()).at("state") == "complete");
  CHECK(f.store.load(a).size() == before);
}

TEST_CASE("recover rebuilds sessions from the store") {
  Fixture f;
  const std::string id = f.svc->create_session("r", 42).at("session_id");
  const auto img = study::presentation_order(*f.svc->snapshot(id), study::Stage::Stage1).front();
  f.svc->submit_response(id, img, Label::Fake, 9);
  StudyService again({}, f.deploy->pool, f.deploy->courses, f.store);
  CHECK(again.recover() == 1);
  CHECK(*again.snapshot(id) == *f.svc->snapshot(id));
  CHECK(again.session_summary(id) == f.svc->session_summary(id));
}

TEST_CASE("http server round trip") {
  Fixture f;
  HttpServer server(*f.svc);
  const int port = server.start("127.0.0.1", 0);
  REQUIRE(port > 0);
  httplib::Client cli("127.0.0.1", port);
  auto created = cli.Post("/api/sessions", R"({"alias":"h"})", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const std::string id = json::parse(created->body).at("session_id");
  auto next = cli.Get("/api/sessions/" + id + "/trials/next");
  REQUIRE(next);
  CHECK(next->status == 200);
  const std::string img = json::parse(next->body).at("image_id");
  auto bytes = cli.Get("/api/images/" + img);
  REQUIRE(bytes);
  CHECK(bytes->status == 200);
  CHECK(bytes->get_header_value("Content-Type") == "image/png");
  CHECK(bytes->body.substr(1, 3) == "PNG");
  auto resp = cli.Post("/api/sessions/" + id + "/responses",
                       json{{"image_id", img}, {"verdict", "fake"}, {"elapsed_ms", 5}}.dump(), "application/json");
  REQUIRE(resp);
  CHECK(resp->status == 200);
  auto forbidden = cli.Get("/api/admin/export");
  REQUIRE(forbidden);
  CHECK(forbidden->status == 403);
  httplib::Headers auth{{"Authorization", "Bearer " + kToken}};
  auto agg = cli.Get("/api/admin/aggregate", auth);
  REQUIRE(agg);
  CHECK(agg->status == 200);
  auto report = cli.Get("/api/sessions/" + id + "/report");
  REQUIRE(report);
  CHECK(report->status == 409);
  server.stop();
}
