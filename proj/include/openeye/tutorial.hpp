#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "openeye/study.hpp"

namespace openeye::tutorial {

enum class BlockKind { Text, Exhibit };

struct ContentBlock {
  BlockKind kind = BlockKind::Text;
  std::string text;         // markdown, Text blocks
  std::string exhibit_ref;  // exhibit id, Exhibit blocks (may carry a caption in `text`)
};

struct Course {
  std::string course_id;
  std::size_t order_index = 0;
  std::string title;
  std::vector<ContentBlock> blocks;
};

/// Courses sorted by order_index, which runs 0..n-1 without gaps.
struct CourseManifest {
  std::vector<Course> courses;

  const Course* find(const std::string& course_id) const;
  std::vector<std::string> course_ids() const;
};

/// Parses a course manifest document. Exhibit references must exist as
/// `<exhibit_dir>/<exhibit_ref>.png`.
CourseManifest parse_courses(const std::string& document, const std::filesystem::path& exhibit_dir);

CourseManifest load_courses(const std::filesystem::path& manifest_path,
                            const std::filesystem::path& exhibit_dir);

/// Marks `course_id` complete for a session in the tutorial. Completing a
/// course twice is a no-op; completing one before all lower-indexed courses
/// fails with OutOfOrderCourse. The last course moves the session to
/// TutorialComplete.
void record_progress(study::StudySession& session, const CourseManifest& manifest,
                     const std::string& course_id);

std::filesystem::path exhibit_path(const std::filesystem::path& exhibit_dir,
                                   const std::string& exhibit_ref);

}  // namespace openeye::tutorial
