#include "openeye/extractor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

namespace openeye::pupil {

EyeCrop default_eye_crop(Side side, int image_width, int image_height) {
  const int size = std::max(8, static_cast<int>(std::lround(0.20 * image_width)));
  return default_eye_crop(side, image_width, image_height, size, size);
}

EyeCrop default_eye_crop(Side side, int image_width, int image_height, int crop_width,
                         int crop_height) {
  const double cx = (side == Side::Left ? 0.37 : 0.63) * image_width;
  const double cy = 0.47 * image_height;
  return {static_cast<int>(std::lround(cx - 0.5 * crop_width)),
          static_cast<int>(std::lround(cy - 0.5 * crop_height)), crop_width, crop_height};
}

namespace {

std::uint8_t luma(const Image& img, int x, int y) {
  const auto* p = img.at(x, y);
  if (img.channels == 1) return p[0];
  return static_cast<std::uint8_t>((299 * p[0] + 587 * p[1] + 114 * p[2] + 500) / 1000);
}

// Largest t such that splitting into {v <= t} and {v > t} maximizes the
// between-class variance.
int otsu_threshold(const std::vector<std::uint8_t>& values) {
  std::array<double, 256> hist{};
  for (auto v : values) hist[v] += 1.0;
  const double total = static_cast<double>(values.size());
  double sum_all = 0.0;
  for (int i = 0; i < 256; ++i) sum_all += i * hist[i];
  double weight0 = 0.0, sum0 = 0.0, best = -1.0;
  int best_t = values.empty() ? 0 : values.front();
  for (int t = 0; t < 255; ++t) {
    weight0 += hist[t];
    sum0 += t * hist[t];
    const double weight1 = total - weight0;
    if (weight0 == 0.0 || weight1 == 0.0) continue;
    const double mean0 = sum0 / weight0;
    const double mean1 = (sum_all - sum0) / weight1;
    const double between = weight0 * weight1 * (mean0 - mean1) * (mean0 - mean1);
    if (between > best) {
      best = between;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace

PupilMask fill_holes(const PupilMask& mask) {
  const int w = mask.width(), h = mask.height();
  PupilMask outside(w, h);
  std::vector<Pixel> stack;
  auto seed = [&](int x, int y) {
    if (!mask.get(x, y) && !outside.get(x, y)) {
      outside.set(x, y);
      stack.push_back({x, y});
    }
  };
  for (int x = 0; x < w; ++x) {
    seed(x, 0);
    seed(x, h - 1);
  }
  for (int y = 0; y < h; ++y) {
    seed(0, y);
    seed(w - 1, y);
  }
  constexpr std::array<Pixel, 4> kFour = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  while (!stack.empty()) {
    const Pixel p = stack.back();
    stack.pop_back();
    for (const auto& d : kFour) {
      const int nx = p.x + d.x, ny = p.y + d.y;
      if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
      seed(nx, ny);
    }
  }
  PupilMask out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!outside.get(x, y)) out.set(x, y);
  return out;
}

std::optional<PupilMask> ThresholdExtractor::extract(const Image& face, const EyeCrop& crop) const {
  if (crop.width < 5 || crop.height < 5 || crop.x < 0 || crop.y < 0 ||
      crop.x + crop.width > face.width || crop.y + crop.height > face.height)
    return std::nullopt;

  std::vector<std::uint8_t> values;
  values.reserve(static_cast<std::size_t>(crop.width) * crop.height);
  for (int y = 0; y < crop.height; ++y)
    for (int x = 0; x < crop.width; ++x) values.push_back(luma(face, crop.x + x, crop.y + y));

  auto value_at = [&](int x, int y) { return values[static_cast<std::size_t>(y) * crop.width + x]; };

  // Darkest pixel in the central half of the crop; ties go to the one nearest
  // the center.
  const double ccx = 0.5 * (crop.width - 1), ccy = 0.5 * (crop.height - 1);
  Pixel seed{-1, -1};
  int seed_value = std::numeric_limits<int>::max();
  double seed_dist = 0.0;
  for (int y = crop.height / 4; y < crop.height - crop.height / 4; ++y) {
    for (int x = crop.width / 4; x < crop.width - crop.width / 4; ++x) {
      const int v = value_at(x, y);
      const double dist = std::hypot(x - ccx, y - ccy);
      if (v < seed_value || (v == seed_value && dist < seed_dist)) {
        seed = {x, y};
        seed_value = v;
        seed_dist = dist;
      }
    }
  }
  if (seed.x < 0) return std::nullopt;

  auto flood = [&](int threshold) {
    PupilMask region(crop.width, crop.height);
    std::vector<Pixel> stack{seed};
    region.set(seed.x, seed.y);
    constexpr std::array<Pixel, 4> kFour = {{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
    while (!stack.empty()) {
      const Pixel p = stack.back();
      stack.pop_back();
      for (const auto& d : kFour) {
        const int nx = p.x + d.x, ny = p.y + d.y;
        if (nx < 0 || ny < 0 || nx >= crop.width || ny >= crop.height) continue;
        if (region.get(nx, ny) || value_at(nx, ny) > threshold) continue;
        region.set(nx, ny);
        stack.push_back({nx, ny});
      }
    }
    return region;
  };

  // First split: eye interior (iris and pupil) against sclera and skin.
  // Second split, within that region: pupil against iris.
  const int t1 = otsu_threshold(values);
  if (seed_value > t1) return std::nullopt;
  const PupilMask dark = flood(t1);
  std::vector<std::uint8_t> inner;
  for (int y = 0; y < crop.height; ++y)
    for (int x = 0; x < crop.width; ++x)
      if (dark.get(x, y)) inner.push_back(value_at(x, y));
  const PupilMask region = flood(otsu_threshold(inner));

  PupilMask filled = fill_holes(region);
  for (int x = 0; x < crop.width; ++x)
    if (filled.get(x, 0) || filled.get(x, crop.height - 1)) return std::nullopt;
  for (int y = 0; y < crop.height; ++y)
    if (filled.get(0, y) || filled.get(crop.width - 1, y)) return std::nullopt;
  if (static_cast<int>(filled.count()) < min_pixels_) return std::nullopt;
  return filled;
}

}  // namespace openeye::pupil
