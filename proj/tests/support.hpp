#pragma once

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>

#include "openeye/image_io.hpp"
#include "openeye/image_pool.hpp"
#include "openeye/service.hpp"

namespace testing {

/// Removes the directory tree on destruction.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag = "t") {
    path = std::filesystem::temp_directory_path() /
           ("openeye-" + tag + "-" + openeye::service::random_session_id().substr(0, 12));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path operator/(const std::string& name) const { return path / name; }
};

inline std::string fake_digest(const std::string& tag) {
  return openeye::sha256_hex({reinterpret_cast<const std::uint8_t*>(tag.data()), tag.size()});
}

/// In-memory pool of records with synthetic digests; no files behind them.
inline openeye::ImagePool synthetic_pool(std::size_t n_real, std::size_t n_fake,
                                         std::size_t fake_not_extractable = 0) {
  openeye::ImagePool pool;
  auto add = [&](openeye::Label label, std::size_t i, bool extractable) {
    openeye::PoolEntry e;
    const std::string tag = std::string(label == openeye::Label::Real ? "real-" : "fake-") + std::to_string(i);
    e.record.id = fake_digest(tag);
    e.record.path = "/nonexistent/" + tag + ".png";
    e.record.label = label;
    e.record.eye_extractable = extractable;
    pool.insert(std::move(e));
  };
  for (std::size_t i = 0; i < n_real; ++i) add(openeye::Label::Real, i, true);
  for (std::size_t i = 0; i < n_fake; ++i) add(openeye::Label::Fake, i, i >= fake_not_extractable);
  return pool;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  openeye::write_file(p, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

inline std::string read_text(const std::filesystem::path& p) {
  const auto b = openeye::read_file(p);
  return {b.begin(), b.end()};
}

}  // namespace testing
