#include <doctest.h>

#include <algorithm>
#include <functional>

#include "openeye/config.hpp"
#include "openeye/tutorial.hpp"
#include "support.hpp"

using namespace openeye;
using namespace openeye::tutorial;
using nlohmann::json;

namespace {

Errc error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::BadRequest;
}

struct Exhibits {
  testing::TempDir dir{"tut"};
  Exhibits() {
    for (const char* ref : {"real_pupils", "fake_pupils", "real_pupils_2", "fake_pupils_2", "x"})
      write_file(dir.path / (std::string(ref) + ".png"), encode_png(Image(4, 4, 3)));
  }
};

std::string manifest_with(const std::vector<std::pair<std::string, int>>& courses) {
  json list = json::array();
  for (const auto& [id, idx] : courses)
    list.push_back({{"course_id", id}, {"order_index", idx}, {"title", id},
                    {"blocks", json::array({{{"kind", "text"}, {"text", "about " + id}}})}});
  return json{{"courses", list}}.dump();
}

study::StudySession tutorial_session() {
  study::StudySession s;
  s.state = study::StageState::TutorialInProgress;
  return s;
}

}  // namespace

TEST_CASE("default manifest has the three courses in order") {
  Exhibits ex;
  const auto m = parse_courses(service::default_course_manifest(), ex.dir.path);
  REQUIRE(m.courses.size() == 3);
  CHECK(m.course_ids() == std::vector<std::string>{"eye_anatomy", "pupil_comparison", "more_examples"});
  for (std::size_t i = 0; i < 3; ++i) CHECK(m.courses[i].order_index == i);
  for (const auto& b : m.courses[0].blocks) CHECK(b.kind == BlockKind::Text);
  std::vector<std::string> refs;
  for (const auto& c : m.courses)
    for (const auto& b : c.blocks)
      if (b.kind == BlockKind::Exhibit) refs.push_back(b.exhibit_ref);
  CHECK(refs == std::vector<std::string>{"real_pupils", "fake_pupils", "real_pupils_2", "fake_pupils_2"});

  testing::TempDir empty("tut");
  CHECK(error_of([&] { parse_courses(service::default_course_manifest(), empty.path); }) == Errc::MissingExhibit);
}

TEST_CASE("manifest validation") {
  Exhibits ex;
  CHECK(error_of([&] { parse_courses(manifest_with({{"a", 0}, {"b", 2}}), ex.dir.path); }) ==
        Errc::NonContiguousOrder);
  CHECK(error_of([&] { parse_courses(manifest_with({{"a", 1}, {"b", 2}}), ex.dir.path); }) ==
        Errc::NonContiguousOrder);
  CHECK(error_of([&] { parse_courses(manifest_with({{"a", 0}, {"a", 1}}), ex.dir.path); }) == Errc::BadManifest);
  CHECK(error_of([&] { parse_courses("{\"courses\": [", ex.dir.path); }) == Errc::BadManifest);
  CHECK(error_of([&] { parse_courses(R"({"courses": []})", ex.dir.path); }) == Errc::BadManifest);
  CHECK(error_of([&] { parse_courses(R"({"other": 1})", ex.dir.path); }) == Errc::BadManifest);
  const std::string escape =
      R"({"courses":[{"course_id":"a","order_index":0,"title":"t","blocks":[{"kind":"exhibit","exhibit_ref":"../x"}]}]})";
  CHECK(error_of([&] { parse_courses(escape, ex.dir.path); }) == Errc::BadManifest);
  const std::string bad_kind =
      R"({"courses":[{"course_id":"a","order_index":0,"title":"t","blocks":[{"kind":"video"}]}]})";
  CHECK(error_of([&] { parse_courses(bad_kind, ex.dir.path); }) == Errc::BadManifest);

  const auto five = parse_courses(manifest_with({{"e", 4}, {"c", 2}, {"a", 0}, {"d", 3}, {"b", 1}}), ex.dir.path);
  CHECK(five.course_ids() == std::vector<std::string>{"a", "b", "c", "d", "e"});
  CHECK(five.find("c")->order_index == 2);
  CHECK(five.find("zz") == nullptr);
}

TEST_CASE("load_courses reads a file") {
  Exhibits ex;
  testing::write_text(ex.dir / "courses.json", manifest_with({{"only", 0}}));
  CHECK(load_courses(ex.dir / "courses.json", ex.dir.path).courses.size() == 1);
  CHECK(error_of([&] { load_courses(ex.dir / "nope.json", ex.dir.path); }) == Errc::BadManifest);
  CHECK(exhibit_path(ex.dir.path, "x") == ex.dir.path / "x.png");
}

TEST_CASE("record_progress examples") {
  Exhibits ex;
  const auto m = parse_courses(manifest_with({{"c0", 0}, {"c1", 1}, {"c2", 2}}), ex.dir.path);

  auto s = tutorial_session();
  record_progress(s, m, "c0");
  record_progress(s, m, "c1");
  CHECK(s.state == study::StageState::TutorialInProgress);
  const auto before = s;
  record_progress(s, m, "c0");
  CHECK(s == before);
  record_progress(s, m, "c2");
  CHECK(s.state == study::StageState::TutorialComplete);

  auto t = tutorial_session();
  CHECK(error_of([&] { record_progress(t, m, "c2"); }) == Errc::OutOfOrderCourse);
  CHECK(error_of([&] { record_progress(t, m, "c9"); }) == Errc::UnknownCourse);
  CHECK(t == tutorial_session());
  study::StudySession wrong;
  wrong.state = study::StageState::Stage1InProgress;
  CHECK(error_of([&] { record_progress(wrong, m, "c0"); }) == Errc::WrongStage);
}

TEST_CASE("property: every completion order that violates order_index is rejected") {
  Exhibits ex;
  const auto m = parse_courses(manifest_with({{"a", 0}, {"b", 1}, {"c", 2}, {"d", 3}}), ex.dir.path);
  std::vector<std::string> perm{"a", "b", "c", "d"};
  do {
    auto s = tutorial_session();
    bool rejected = false;
    for (const auto& id : perm) {
      try {
        record_progress(s, m, id);
      } catch (const Error& e) {
        CHECK(e.code() == Errc::OutOfOrderCourse);
        rejected = true;
        break;
      }
    }
    const bool sorted = std::is_sorted(perm.begin(), perm.end());
    CHECK(rejected == !sorted);
    CHECK((s.state == study::StageState::TutorialComplete) == sorted);
  } while (std::next_permutation(perm.begin(), perm.end()));
}
