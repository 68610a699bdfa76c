#include "openeye/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "openeye/error.hpp"
#include "default_courses.inc"

namespace fs = std::filesystem;

namespace openeye::service {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
    return v.substr(1, v.size() - 2);
  return v;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) throw Error(Errc::BadConfig, "bad value for " + key + ": " + value);
  return out;
}

fs::path resolve(const fs::path& base, const std::string& value) {
  const fs::path p(value);
  return p.is_absolute() ? p : base / p;
}

}  // namespace

ServiceConfig parse_config(const std::string& text, const fs::path& base_dir) {
  ServiceConfig config;
  bool have_data_dir = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::BadConfig, "line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = unquote(trim(line.substr(eq + 1)));
    if (key == "test_size") {
      config.test_size = parse_number<std::size_t>(key, value);
      if (config.test_size == 0 || config.test_size % 2 != 0)
        throw Error(Errc::BadConfig, "test_size must be a positive even number");
    } else if (key == "biou_dilation") {
      config.biou_dilation = parse_number<int>(key, value);
      if (config.biou_dilation < 0) throw Error(Errc::BadConfig, "biou_dilation must be >= 0");
    } else if (key == "tau") {
      config.tau = parse_number<double>(key, value);
    } else if (key == "course_manifest") {
      config.course_manifest = resolve(base_dir, value);
    } else if (key == "data_dir") {
      config.data_dir = resolve(base_dir, value);
      have_data_dir = true;
    } else {
      throw Error(Errc::BadConfig, "unknown config key \"" + key + "\"");
    }
  }
  if (!have_data_dir) throw Error(Errc::BadConfig, "config must set data_dir");
  return config;
}

ServiceConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::BadConfig, "cannot read config " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), fs::absolute(path).parent_path());
}

std::string render_config(const ServiceConfig& config) {
  std::ostringstream out;
  out.precision(17);
  out << "test_size = " << config.test_size << "\n"
      << "biou_dilation = " << config.biou_dilation << "\n"
      << "tau = " << config.tau << "\n";
  if (!config.course_manifest.empty()) out << "course_manifest = \"" << config.course_manifest.string() << "\"\n";
  out << "data_dir = \"" << config.data_dir.string() << "\"\n";
  return out.str();
}

const std::string& default_course_manifest() {
  static const std::string manifest(kDefaultCourseManifest);
  return manifest;
}

}  // namespace openeye::service
