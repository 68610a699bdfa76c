#include "openeye/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "openeye/config.hpp"
#include "openeye/extractor.hpp"
#include "openeye/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace openeye::fixtures {

namespace {

constexpr double kPi = std::numbers::pi;

double blob_radius(const Blob& b, double phi) {
  double s = 0.0;
  for (std::size_t k = 0; k < b.amp.size(); ++k) s += b.amp[k] * std::sin((k + 2) * phi + b.phase[k]);
  return b.r0 * (1.0 + s);
}

double uniform(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

Blob random_blob(CounterRng& rng, double cx, double cy) {
  Blob b{cx, cy, uniform(rng, 9.0, 11.0), {}, {}};
  for (int k = 0; k < 4; ++k) {
    b.amp.push_back(uniform(rng, 0.4, 1.0));
    b.phase.push_back(uniform(rng, 0.0, 2.0 * kPi));
  }
  // Scale so the largest radial deviation is 2.5 to 4 px.
  double peak = 0.0;
  for (int i = 0; i < 720; ++i) peak = std::max(peak, std::abs(blob_radius(b, i * kPi / 360.0) / b.r0 - 1.0));
  const double target = uniform(rng, 2.5, 4.0) / b.r0;
  for (auto& a : b.amp) a *= target / peak;
  return b;
}

pupil::Ellipse random_ellipse(CounterRng& rng, double cx, double cy) {
  const double a = uniform(rng, 9.0, 12.0);
  return {cx, cy, a, a * uniform(rng, 0.85, 1.0), uniform(rng, 0.0, kPi)};
}

void write_mask(const fs::path& path, const pupil::PupilMask& m) {
  Image img(m.width(), m.height(), 1);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) img.at(x, y)[0] = m.get(x, y) ? 255 : 0;
  write_file(path, encode_png(img));
}

}  // namespace

pupil::PupilMask ellipse_pupil(const pupil::Ellipse& e, int width, int height) {
  return pupil::rasterize_ellipse(e, width, height);
}

pupil::PupilMask blob_pupil(const Blob& blob, int width, int height) {
  pupil::PupilMask m(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      const double dx = x - blob.cx, dy = y - blob.cy;
      if (std::hypot(dx, dy) <= blob_radius(blob, std::atan2(dy, dx))) m.set(x, y);
    }
  return m;
}

Image render_face(int size, const pupil::PupilMask& left, const pupil::PupilMask& right,
                  std::uint64_t seed) {
  CounterRng rng(seed);
  Image img(size, size, 3);
  const std::uint8_t skin[3] = {224, 186, 160};
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      const int n = static_cast<int>(rng.below(13)) - 6;
      for (int c = 0; c < 3; ++c) img.at(x, y)[c] = static_cast<std::uint8_t>(skin[c] + n);
    }

  const std::uint8_t iris[3] = {static_cast<std::uint8_t>(90 + rng.below(40)),
                                static_cast<std::uint8_t>(70 + rng.below(30)),
                                static_cast<std::uint8_t>(50 + rng.below(60))};
  for (const auto side : {pupil::Side::Left, pupil::Side::Right}) {
    const auto& mask = side == pupil::Side::Left ? left : right;
    const pupil::EyeCrop crop = pupil::default_eye_crop(side, size, size, mask.width(), mask.height());
    const double cx = crop.x + 0.5 * (crop.width - 1), cy = crop.y + 0.5 * (crop.height - 1);
    const pupil::Ellipse sclera{cx, cy, 0.44 * crop.width, 0.26 * crop.width, 0.0};
    const double iris_r = 0.22 * crop.width;

    double pcx = 0, pcy = 0;
    const double pn = static_cast<double>(mask.count());
    for (int y = 0; y < mask.height(); ++y)
      for (int x = 0; x < mask.width(); ++x)
        if (mask.get(x, y)) pcx += x, pcy += y;
    pcx = crop.x + pcx / std::max(1.0, pn);
    pcy = crop.y + pcy / std::max(1.0, pn);
    const double glint_x = pcx + uniform(rng, -2.5, 2.5), glint_y = pcy + uniform(rng, -2.5, 0.0);

    for (int y = crop.y; y < crop.y + crop.height; ++y)
      for (int x = crop.x; x < crop.x + crop.width; ++x) {
        if (!img.contains(x, y)) continue;
        auto* p = img.at(x, y);
        const int n = static_cast<int>(rng.below(7)) - 3;
        if (pupil::ellipse_level(sclera, x, y) <= 1.0)
          for (int c = 0; c < 3; ++c) p[c] = static_cast<std::uint8_t>(236 + n);
        if (std::hypot(x - pcx, y - pcy) <= iris_r)
          for (int c = 0; c < 3; ++c) p[c] = static_cast<std::uint8_t>(iris[c] + n);
        if (mask.get(x - crop.x, y - crop.y)) {
          const bool glint = std::hypot(x - glint_x, y - glint_y) <= 1.6;
          for (int c = 0; c < 3; ++c) p[c] = static_cast<std::uint8_t>(glint ? 250 : 16 + n);
        }
      }
  }
  return img;
}

Corpus generate_corpus(const fs::path& dir, const CorpusOptions& options) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "masks");
  const int size = options.image_size;
  const pupil::EyeCrop crop = pupil::default_eye_crop(pupil::Side::Left, size, size);
  const double ccx = 0.5 * (crop.width - 1), ccy = 0.5 * (crop.height - 1);

  Corpus corpus;
  corpus.manifest = dir / "manifest.jsonl";
  corpus.courses = dir / "courses.json";
  corpus.config = dir / "openeye.conf";
  std::ofstream manifest(corpus.manifest, std::ios::binary | std::ios::trunc);

  CounterRng rng(options.seed);
  auto emit = [&](bool fake, std::size_t index) {
    char name[32];
    std::snprintf(name, sizeof name, "%s_%03zu", fake ? "fake" : "real", index);
    pupil::PupilMask masks[2];
    for (auto& m : masks) {
      const double cx = ccx + uniform(rng, -1.5, 1.5), cy = ccy + uniform(rng, -1.5, 1.5);
      m = fake ? blob_pupil(random_blob(rng, cx, cy), crop.width, crop.height)
               : ellipse_pupil(random_ellipse(rng, cx, cy), crop.width, crop.height);
    }
    const Image face = render_face(size, masks[0], masks[1], rng());
    const std::string stem = name;
    write_file(dir / "images" / (stem + ".png"), encode_png(face));
    write_mask(dir / "masks" / (stem + "_left.png"), masks[0]);
    write_mask(dir / "masks" / (stem + "_right.png"), masks[1]);

    json line{{"path", "images/" + stem + ".png"},
              {"label", fake ? "fake" : "real"},
              {"source", fake ? "fixture-blob" : "fixture-ellipse"},
              {"mask_left", "masks/" + stem + "_left.png"},
              {"mask_right", "masks/" + stem + "_right.png"}};
    if (index < 2) line["exhibit"] = std::string(fake ? "fake_pupils" : "real_pupils") + (index ? "_2" : "");
    manifest << line.dump() << '\n';

    const auto face_score = pupil::score_face(masks[0], masks[1], options.dilation, stem);
    (fake ? corpus.fake_scores : corpus.real_scores).push_back(face_score.aggregate);
  };
  for (std::size_t i = 0; i < options.n_real; ++i) emit(false, i);
  for (std::size_t i = 0; i < options.n_fake; ++i) emit(true, i);
  manifest.close();
  if (!manifest) throw Error(Errc::StorageFailure, "cannot write " + corpus.manifest.string());

  corpus.tau = pupil::calibrate_tau(corpus.real_scores, corpus.fake_scores);

  const std::string& courses = service::default_course_manifest();
  write_file(corpus.courses, {reinterpret_cast<const std::uint8_t*>(courses.data()), courses.size()});
  service::ServiceConfig config;
  config.tau = corpus.tau;
  config.biou_dilation = options.dilation;
  config.course_manifest = "courses.json";
  config.data_dir = "data";
  const std::string text = render_config(config);
  write_file(corpus.config, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
  return corpus;
}

}  // namespace openeye::fixtures
