#pragma once

#include <filesystem>
#include <string>

#include "openeye/pupil.hpp"
#include "openeye/study.hpp"

namespace openeye::service {

/// Threshold from the calibration run on the bundled synthetic fixture corpus.
inline constexpr double kDefaultTau = 0.76926018091495951;

/// Deployment settings. The file is `key = value` lines with `#` comments;
/// string values may be quoted. Relative paths resolve against the config
/// file's directory.
struct ServiceConfig {
  std::size_t test_size = study::kDefaultTestSize;
  int biou_dilation = pupil::kDefaultDilation;
  double tau = kDefaultTau;
  std::filesystem::path course_manifest;  // empty: built-in default courses
  std::filesystem::path data_dir;

  std::filesystem::path pool_dir() const { return data_dir / "pool"; }
  std::filesystem::path masks_dir() const { return data_dir / "masks"; }
  std::filesystem::path exhibits_dir() const { return data_dir / "exhibits"; }
  std::filesystem::path events_dir() const { return data_dir / "events"; }
};

/// Throws BadConfig on unknown keys, malformed values, or a missing data_dir.
ServiceConfig parse_config(const std::string& text, const std::filesystem::path& base_dir);
ServiceConfig load_config(const std::filesystem::path& path);

std::string render_config(const ServiceConfig& config);

/// The three-course default tutorial manifest (JSON).
const std::string& default_course_manifest();

}  // namespace openeye::service
