#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "openeye/image_io.hpp"
#include "openeye/pupil.hpp"

namespace openeye::fixtures {

/// Pupil whose edge is the given ellipse, rasterized into a crop.
pupil::PupilMask ellipse_pupil(const pupil::Ellipse& e, int width, int height);

/// Pupil with radius r0 * (1 + sum_k amp[k] sin((k + 2) phi + phase[k])).
struct Blob {
  double cx = 0.0;
  double cy = 0.0;
  double r0 = 0.0;
  std::vector<double> amp;
  std::vector<double> phase;
};

pupil::PupilMask blob_pupil(const Blob& blob, int width, int height);

/// Draws a synthetic aligned face with the two pupil masks painted into the
/// default eye crops. `masks` are in crop coordinates.
Image render_face(int size, const pupil::PupilMask& left, const pupil::PupilMask& right,
                  std::uint64_t seed);

struct CorpusOptions {
  std::size_t n_real = 50;
  std::size_t n_fake = 50;
  int image_size = 384;
  std::uint64_t seed = 7;
  int dilation = pupil::kDefaultDilation;
};

struct Corpus {
  std::filesystem::path manifest;  // manifest.jsonl
  std::filesystem::path config;    // openeye.conf, data_dir = data
  std::filesystem::path courses;   // courses.json
  std::vector<double> real_scores;  // face aggregates
  std::vector<double> fake_scores;
  double tau = 0.0;  // midpoint calibration over the corpus
};

/// Writes images/, masks/, manifest.jsonl, courses.json and openeye.conf
/// under `dir`. "Real" faces carry elliptical pupils; "fake" faces carry
/// irregular blobs that differ between the eyes. The first two faces of each
/// label are flagged as tutorial exhibits.
Corpus generate_corpus(const std::filesystem::path& dir, const CorpusOptions& options = {});

}  // namespace openeye::fixtures
