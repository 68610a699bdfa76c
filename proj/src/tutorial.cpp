#include "openeye/tutorial.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace openeye::tutorial {

const Course* CourseManifest::find(const std::string& course_id) const {
  for (const auto& c : courses)
    if (c.course_id == course_id) return &c;
  return nullptr;
}

std::vector<std::string> CourseManifest::course_ids() const {
  std::vector<std::string> ids;
  for (const auto& c : courses) ids.push_back(c.course_id);
  return ids;
}

fs::path exhibit_path(const fs::path& exhibit_dir, const std::string& exhibit_ref) {
  return exhibit_dir / (exhibit_ref + ".png");
}

namespace {

bool safe_ref(const std::string& ref) {
  return !ref.empty() && std::all_of(ref.begin(), ref.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
  });
}

}  // namespace

CourseManifest parse_courses(const std::string& document, const fs::path& exhibit_dir) {
  CourseManifest manifest;
  try {
    const json doc = json::parse(document);
    for (const auto& c : doc.at("courses")) {
      Course course;
      course.course_id = c.at("course_id").get<std::string>();
      course.order_index = c.at("order_index").get<std::size_t>();
      course.title = c.at("title").get<std::string>();
      for (const auto& b : c.value("blocks", json::array())) {
        ContentBlock block;
        const auto kind = b.at("kind").get<std::string>();
        if (kind == "text") {
          block.kind = BlockKind::Text;
          block.text = b.at("text").get<std::string>();
        } else if (kind == "exhibit") {
          block.kind = BlockKind::Exhibit;
          block.exhibit_ref = b.at("exhibit_ref").get<std::string>();
          block.text = b.value("text", "");
        } else {
          throw Error(Errc::BadManifest, "unknown block kind \"" + kind + "\"");
        }
        course.blocks.push_back(std::move(block));
      }
      manifest.courses.push_back(std::move(course));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::BadManifest, std::string("course manifest: ") + e.what());
  }

  if (manifest.courses.empty()) throw Error(Errc::BadManifest, "course manifest has no courses");
  std::set<std::string> ids;
  for (const auto& c : manifest.courses)
    if (!ids.insert(c.course_id).second)
      throw Error(Errc::BadManifest, "duplicate course_id " + c.course_id);

  std::sort(manifest.courses.begin(), manifest.courses.end(),
            [](const Course& a, const Course& b) { return a.order_index < b.order_index; });
  for (std::size_t i = 0; i < manifest.courses.size(); ++i)
    if (manifest.courses[i].order_index != i)
      throw Error(Errc::NonContiguousOrder,
                  "order_index values must be 0.." + std::to_string(manifest.courses.size() - 1));

  for (const auto& c : manifest.courses) {
    for (const auto& b : c.blocks) {
      if (b.kind != BlockKind::Exhibit) continue;
      if (!safe_ref(b.exhibit_ref))
        throw Error(Errc::BadManifest, "exhibit_ref must be [A-Za-z0-9_-]+: " + b.exhibit_ref);
      if (!fs::is_regular_file(exhibit_path(exhibit_dir, b.exhibit_ref)))
        throw Error(Errc::MissingExhibit, "course " + c.course_id + " references missing exhibit " +
                                              b.exhibit_ref);
    }
  }
  return manifest;
}

CourseManifest load_courses(const fs::path& manifest_path, const fs::path& exhibit_dir) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(Errc::BadManifest, "cannot read course manifest " + manifest_path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_courses(buffer.str(), exhibit_dir);
}

void record_progress(study::StudySession& session, const CourseManifest& manifest,
                     const std::string& course_id) {
  if (session.state != study::StageState::TutorialInProgress)
    throw Error(Errc::WrongStage, "tutorial is not in progress");
  const Course* course = manifest.find(course_id);
  if (!course) throw Error(Errc::UnknownCourse, "unknown course " + course_id);
  if (session.course_progress.count(course_id)) return;
  for (const auto& earlier : manifest.courses) {
    if (earlier.order_index >= course->order_index) break;
    if (!session.course_progress.count(earlier.course_id))
      throw Error(Errc::OutOfOrderCourse,
                  "complete course " + earlier.course_id + " before " + course_id);
  }
  study::mark_course_complete(session, course_id, manifest.courses.size());
}

}  // namespace openeye::tutorial
