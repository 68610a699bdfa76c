#include "openeye/image_pool.hpp"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "openeye/exhibit.hpp"
#include "openeye/extractor.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace openeye {

std::string_view to_string(Label label) { return label == Label::Real ? "real" : "fake"; }

std::optional<Label> parse_label(std::string_view text) {
  if (text == "real") return Label::Real;
  if (text == "fake") return Label::Fake;
  return std::nullopt;
}

ImagePool::ImagePool(fs::path storage_root) : root_(std::move(storage_root)) {}

const PoolEntry* ImagePool::find(const std::string& id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

void ImagePool::insert(PoolEntry entry) {
  const std::string id = entry.record.id;
  const Label label = entry.record.label;
  if (!entries_.emplace(id, std::move(entry)).second)
    throw Error(Errc::DuplicateId, "image already in pool: " + id);
  (label == Label::Real ? counts_.real : counts_.fake) += 1;
}

fs::path ImagePool::resolve(const ImageRecord& record) const {
  const fs::path p(record.path);
  return p.is_absolute() || root_.empty() ? p : root_ / p;
}

std::map<std::string, Label> ImagePool::labels() const {
  std::map<std::string, Label> out;
  for (const auto& [id, entry] : entries_) out.emplace(id, entry.record.label);
  return out;
}

bool operator==(const ImagePool& a, const ImagePool& b) {
  if (a.counts_ != b.counts_ || a.entries_.size() != b.entries_.size()) return false;
  for (auto ia = a.entries_.begin(), ib = b.entries_.begin(); ia != a.entries_.end(); ++ia, ++ib)
    if (ia->second.record != ib->second.record) return false;
  return true;
}

namespace {

Bytes encode_mask(const pupil::PupilMask& mask) {
  Image img(mask.width(), mask.height(), 1);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x) img.at(x, y)[0] = mask.get(x, y) ? 255 : 0;
  return encode_png(img);
}

pupil::PupilMask decode_mask(std::span<const std::uint8_t> bytes) {
  const Image img = to_gray(decode_image(bytes));
  pupil::PupilMask mask(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      if (img.at(x, y)[0] != 0) mask.set(x, y);
  return mask;
}

json ellipse_json(const pupil::Ellipse& e) {
  return {{"cx", e.cx}, {"cy", e.cy}, {"a", e.a}, {"b", e.b}, {"theta", e.theta}};
}

pupil::Ellipse ellipse_from(const json& j) {
  return {j.at("cx").get<double>(), j.at("cy").get<double>(), j.at("a").get<double>(),
          j.at("b").get<double>(), j.at("theta").get<double>()};
}

std::optional<pupil::EyeCrop> crop_from(const json& entry, const char* key) {
  if (!entry.contains(key) || entry[key].is_null()) return std::nullopt;
  const json& c = entry[key];
  if (!c.is_array() || c.size() != 4) throw Error(Errc::ManifestUnreadable, std::string(key) + " must be [x, y, w, h]");
  return pupil::EyeCrop{c[0].get<int>(), c[1].get<int>(), c[2].get<int>(), c[3].get<int>()};
}

std::string mask_file_name(const std::string& id, pupil::Side side) {
  return id + "_" + std::string(pupil::to_string(side)) + ".png";
}

}  // namespace

void ImagePool::save() const {
  if (root_.empty()) throw Error(Errc::StorageFailure, "pool has no storage root");
  fs::create_directories(root_ / "pool");
  const fs::path tmp = root_ / "pool" / "index.jsonl.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    for (const auto& [id, entry] : entries_) {
      const ImageRecord& r = entry.record;
      json anns = json::array();
      for (const auto& a : entry.annotations) {
        anns.push_back({{"side", pupil::to_string(a.side)},
                        {"crop", {a.crop.x, a.crop.y, a.crop.width, a.crop.height}},
                        {"mask_path", "masks/" + mask_file_name(id, a.side)},
                        {"ellipse", ellipse_json(a.fitted)},
                        {"biou", a.biou}});
      }
      json line = {{"id", r.id},         {"path", r.path},   {"label", to_string(r.label)},
                   {"source", r.source}, {"eye_extractable", r.eye_extractable},
                   {"width", r.width},   {"height", r.height}, {"annotations", anns}};
      line["exhibit"] = r.exhibit ? json(*r.exhibit) : json(nullptr);
      out << line.dump() << '\n';
    }
    if (!out) throw Error(Errc::StorageFailure, "cannot write pool index");
  }
  fs::rename(tmp, root_ / "pool" / "index.jsonl");
}

ImagePool ImagePool::load(const fs::path& root) {
  ImagePool pool(root);
  std::ifstream in(root / "pool" / "index.jsonl");
  if (!in) return pool;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    PoolEntry entry;
    ImageRecord& r = entry.record;
    r.id = j.at("id").get<std::string>();
    r.path = j.at("path").get<std::string>();
    r.label = parse_label(j.at("label").get<std::string>()).value();
    r.source = j.value("source", "");
    r.eye_extractable = j.at("eye_extractable").get<bool>();
    r.width = j.at("width").get<int>();
    r.height = j.at("height").get<int>();
    if (j.contains("exhibit") && j["exhibit"].is_string()) r.exhibit = j["exhibit"].get<std::string>();
    for (const auto& a : j.value("annotations", json::array())) {
      pupil::PupilAnnotation ann;
      ann.image_id = r.id;
      ann.side = a.at("side").get<std::string>() == "left" ? pupil::Side::Left : pupil::Side::Right;
      const auto& c = a.at("crop");
      ann.crop = {c[0].get<int>(), c[1].get<int>(), c[2].get<int>(), c[3].get<int>()};
      ann.mask = decode_mask(read_file(root / a.at("mask_path").get<std::string>()));
      ann.fitted = ellipse_from(a.at("ellipse"));
      ann.biou = a.at("biou").get<double>();
      entry.annotations.push_back(std::move(ann));
    }
    pool.insert(std::move(entry));
  }
  return pool;
}

IngestReport ingest_manifest(const fs::path& manifest_path, ImagePool& pool,
                             const IngestOptions& options) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(Errc::ManifestUnreadable, "cannot read manifest " + manifest_path.string());
  const fs::path base = fs::absolute(manifest_path).parent_path();

  std::optional<fs::path> exhibit_dir = options.exhibit_dir;
  if (!exhibit_dir && pool.rooted()) exhibit_dir = pool.storage_root() / "exhibits";
  if (pool.rooted()) {
    fs::create_directories(pool.storage_root() / "pool");
    fs::create_directories(pool.storage_root() / "masks");
  }

  IngestReport report;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::string entry_path;
    auto fail = [&](Errc code, std::string detail) {
      report.errors.push_back({line_no, entry_path, code, std::move(detail)});
      ++report.skipped;
    };

    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(Errc::ManifestUnreadable, std::string("malformed JSON: ") + e.what());
      continue;
    }
    if (!j.is_object() || !j.contains("path") || !j["path"].is_string()) {
      fail(Errc::ManifestUnreadable, "entry needs a string \"path\"");
      continue;
    }
    entry_path = j["path"].get<std::string>();
    const auto label = j.contains("label") && j["label"].is_string()
                           ? parse_label(j["label"].get<std::string>())
                           : std::nullopt;
    if (!label) {
      fail(Errc::BadLabel, "label must be \"real\" or \"fake\"");
      continue;
    }

    try {
      const fs::path file = fs::path(entry_path).is_absolute() ? fs::path(entry_path) : base / entry_path;
      if (!fs::is_regular_file(file)) throw Error(Errc::MissingFile, "no such file: " + file.string());
      const Bytes bytes = read_file(file);
      const ImageFormat format = sniff_format(bytes);
      if (format == ImageFormat::Unknown)
        throw Error(Errc::MissingFile, "unsupported image format (PNG and JPEG only): " + file.string());

      PoolEntry entry;
      ImageRecord& r = entry.record;
      r.id = sha256_hex(bytes);
      if (pool.contains(r.id)) throw Error(Errc::DuplicateId, "duplicate image digest " + r.id);
      r.label = *label;
      r.source = j.value("source", "");
      if (j.contains("exhibit") && j["exhibit"].is_string()) r.exhibit = j["exhibit"].get<std::string>();
      const Image face = decode_image(bytes);
      r.width = face.width;
      r.height = face.height;

      for (const auto side : {pupil::Side::Left, pupil::Side::Right}) {
        const char* mask_key = side == pupil::Side::Left ? "mask_left" : "mask_right";
        const char* crop_key = side == pupil::Side::Left ? "crop_left" : "crop_right";
        const auto crop_override = crop_from(j, crop_key);
        std::optional<pupil::PupilMask> mask;
        pupil::EyeCrop crop;
        if (j.contains(mask_key) && j[mask_key].is_string()) {
          const fs::path mask_path = base / j[mask_key].get<std::string>();
          if (!fs::is_regular_file(mask_path))
            throw Error(Errc::MissingFile, "no such mask: " + mask_path.string());
          mask = decode_mask(read_file(mask_path));
          crop = crop_override.value_or(
              pupil::default_eye_crop(side, r.width, r.height, mask->width(), mask->height()));
          if (crop.width != mask->width() || crop.height != mask->height())
            throw Error(Errc::DimensionMismatch, std::string(mask_key) + " does not match its crop");
        } else if (options.extractor) {
          crop = crop_override.value_or(pupil::default_eye_crop(side, r.width, r.height));
          mask = options.extractor->extract(face, crop);
        }
        if (!mask) continue;
        try {
          const pupil::PupilScore score = pupil::score_pupil(*mask, options.dilation);
          entry.annotations.push_back({r.id, side, crop, std::move(*mask), score.fitted, score.biou});
        } catch (const Error&) {
          // Unscorable eye: the image stays in the pool but is not extractable.
        }
      }
      r.eye_extractable = entry.annotations.size() == 2;

      if (pool.rooted()) {
        r.path = "pool/" + r.id + std::string(extension(format));
        write_file(pool.storage_root() / r.path, bytes);
        for (const auto& a : entry.annotations)
          write_file(pool.storage_root() / "masks" / mask_file_name(r.id, a.side), encode_mask(a.mask));
      } else {
        r.path = fs::absolute(file).lexically_normal().string();
      }

      if (r.exhibit && exhibit_dir && !entry.annotations.empty()) {
        fs::create_directories(*exhibit_dir);
        write_file(*exhibit_dir / (*r.exhibit + ".png"), pupil::build_exhibit(bytes, entry.annotations));
        report.exhibits_written.push_back(*r.exhibit);
      }
      pool.insert(std::move(entry));
      ++report.added;
    } catch (const Error& e) {
      fail(e.code(), e.what());
    } catch (const json::exception& e) {
      fail(Errc::ManifestUnreadable, e.what());
    }
  }
  if (pool.rooted()) pool.save();
  return report;
}

ValidationReport validate_pool(const ImagePool& pool, std::size_t test_size) {
  if (test_size == 0 || test_size % 2 != 0)
    throw Error(Errc::OddTestSize, "test_size must be a positive even number");
  ValidationReport v;
  v.required_per_label = test_size / 2;
  for (const auto& [id, entry] : pool.entries()) {
    if (!entry.record.eye_extractable) continue;
    (entry.record.label == Label::Real ? v.extractable.real : v.extractable.fake) += 1;
  }
  auto gap = [&](std::size_t have) { return have >= v.required_per_label ? 0 : v.required_per_label - have; };
  v.shortfall = {gap(v.extractable.real), gap(v.extractable.fake)};
  v.valid = v.shortfall.real == 0 && v.shortfall.fake == 0;
  return v;
}

std::pair<Bytes, ImageRecord> get_image(const ImagePool& pool, const std::string& id) {
  const PoolEntry* entry = pool.find(id);
  if (!entry) throw Error(Errc::UnknownImage, "unknown image " + id);
  const fs::path file = pool.resolve(entry->record);
  if (!fs::is_regular_file(file))
    throw Error(Errc::MissingFile, "image file missing on disk: " + file.string());
  Bytes bytes = read_file(file);
  if (sha256_hex(bytes) != id) throw Error(Errc::DigestMismatch, "stored bytes no longer match " + id);
  return {std::move(bytes), entry->record};
}

}  // namespace openeye
