#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "openeye/error.hpp"
#include "openeye/image_io.hpp"
#include "openeye/pupil.hpp"

namespace openeye {

namespace pupil {
class PupilExtractor;
}

enum class Label { Real, Fake };

std::string_view to_string(Label label);
/// Accepts exactly "real" or "fake".
std::optional<Label> parse_label(std::string_view text);

struct ImageRecord {
  std::string id;    // SHA-256 of the file bytes, lowercase hex
  std::string path;  // relative to the pool's storage root, or absolute when unrooted
  Label label = Label::Real;
  std::string source;
  bool eye_extractable = false;
  int width = 0;
  int height = 0;
  std::optional<std::string> exhibit;  // operator-assigned exhibit id

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

struct LabelCounts {
  std::size_t real = 0;
  std::size_t fake = 0;
  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

struct PoolEntry {
  ImageRecord record;
  std::vector<pupil::PupilAnnotation> annotations;  // cached at ingestion
};

/// Labeled image pool keyed by content digest. When a storage root is set,
/// ingested images are copied to `<root>/pool/` and masks to `<root>/masks/`
/// so the pool can be saved and reloaded; otherwise records point at the
/// original files.
class ImagePool {
 public:
  ImagePool() = default;
  explicit ImagePool(std::filesystem::path storage_root);

  const std::filesystem::path& storage_root() const noexcept { return root_; }
  bool rooted() const noexcept { return !root_.empty(); }

  std::size_t size() const noexcept { return entries_.size(); }
  const LabelCounts& counts() const noexcept { return counts_; }
  bool contains(const std::string& id) const { return entries_.count(id) != 0; }
  const PoolEntry* find(const std::string& id) const;
  const std::map<std::string, PoolEntry>& entries() const noexcept { return entries_; }

  /// Fails with DuplicateId when the id is already present.
  void insert(PoolEntry entry);

  /// Resolves a record path against the storage root.
  std::filesystem::path resolve(const ImageRecord& record) const;

  /// id -> label for every record.
  std::map<std::string, Label> labels() const;

  /// Writes `<root>/pool/index.jsonl` (requires a storage root).
  void save() const;
  /// Loads a pool previously saved under `root`; an absent index gives an
  /// empty pool.
  static ImagePool load(const std::filesystem::path& root);

  friend bool operator==(const ImagePool& a, const ImagePool& b);

 private:
  std::filesystem::path root_;
  std::map<std::string, PoolEntry> entries_;
  LabelCounts counts_;
};

struct IngestError {
  std::size_t line = 0;  // 1-based manifest line
  std::string path;
  Errc code = Errc::ManifestUnreadable;
  std::string detail;
};

struct IngestReport {
  std::size_t added = 0;
  std::size_t skipped = 0;
  std::vector<IngestError> errors;
  std::vector<std::string> exhibits_written;
};

struct IngestOptions {
  /// Null means automatic extraction is unavailable: an image is then
  /// eye-extractable only when the manifest supplies both masks and both score.
  const pupil::PupilExtractor* extractor = nullptr;
  int dilation = pupil::kDefaultDilation;
  /// Exhibits for flagged entries go here; defaults to `<root>/exhibits`.
  std::optional<std::filesystem::path> exhibit_dir;
};

/// Ingests a JSON Lines manifest. Per-entry failures are reported, never
/// fatal; an unreadable manifest file throws ManifestUnreadable.
IngestReport ingest_manifest(const std::filesystem::path& manifest_path, ImagePool& pool,
                             const IngestOptions& options = {});

struct ValidationReport {
  bool valid = false;
  std::size_t required_per_label = 0;
  LabelCounts extractable;
  LabelCounts shortfall;
};

ValidationReport validate_pool(const ImagePool& pool, std::size_t test_size);

/// Returns the stored bytes, verified against the id. Throws UnknownImage,
/// MissingFile (file gone) or DigestMismatch (file altered).
std::pair<Bytes, ImageRecord> get_image(const ImagePool& pool, const std::string& id);

}  // namespace openeye
