#include "openeye/exhibit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace openeye::pupil {

namespace {

constexpr std::uint8_t kRed[3] = {230, 40, 40};
constexpr std::uint8_t kYellow[3] = {250, 220, 30};

void put(Image& img, int x, int y, const std::uint8_t (&rgb)[3]) {
  if (!img.contains(x, y)) return;
  auto* p = img.at(x, y);
  p[0] = rgb[0];
  p[1] = rgb[1];
  p[2] = rgb[2];
}

void render_tile(const Image& face, const PupilAnnotation& ann, int tile, int offset_x, Image& out) {
  const EyeCrop& crop = ann.crop;
  const double scale = static_cast<double>(tile) / std::max(crop.width, crop.height);
  auto source = [&](int tx, int ty) {
    return std::pair<int, int>{static_cast<int>(std::floor(tx / scale)),
                               static_cast<int>(std::floor(ty / scale))};
  };
  auto in_mask = [&](int tx, int ty) {
    if (tx < 0 || ty < 0 || tx >= tile || ty >= tile) return false;
    const auto [mx, my] = source(tx, ty);
    return ann.mask.get_or_false(mx, my);
  };

  for (int ty = 0; ty < tile; ++ty) {
    for (int tx = 0; tx < tile; ++tx) {
      const auto [cx, cy] = source(tx, ty);
      const int fx = crop.x + cx, fy = crop.y + cy;
      std::uint8_t* dst = out.at(offset_x + tx, ty);
      if (cx >= crop.width || cy >= crop.height || !face.contains(fx, fy)) {
        dst[0] = dst[1] = dst[2] = 0;
        continue;
      }
      const auto* src = face.at(fx, fy);
      for (int c = 0; c < 3; ++c) dst[c] = face.channels == 1 ? src[0] : src[c];
    }
  }

  // Mask outline: inside pixels within one tile pixel of the outside.
  for (int ty = 0; ty < tile; ++ty) {
    for (int tx = 0; tx < tile; ++tx) {
      if (!in_mask(tx, ty)) continue;
      bool edge = false;
      for (int dy = -1; dy <= 1 && !edge; ++dy)
        for (int dx = -1; dx <= 1 && !edge; ++dx)
          if (!in_mask(tx + dx, ty + dy)) edge = true;
      if (edge) put(out, offset_x + tx, ty, kRed);
    }
  }

  // Fitted ellipse; crop pixel centers sit at (x + 0.5) * scale in the tile.
  const double perimeter = 2.0 * std::numbers::pi * std::max(ann.fitted.a, ann.fitted.b) * scale;
  const int samples = std::max(64, static_cast<int>(4.0 * perimeter));
  for (int i = 0; i < samples; ++i) {
    const double t = 2.0 * std::numbers::pi * i / samples;
    const Point2 p = ellipse_point(ann.fitted, t);
    const int tx = static_cast<int>(std::floor((p.x + 0.5) * scale));
    const int ty = static_cast<int>(std::floor((p.y + 0.5) * scale));
    for (int dy = 0; dy <= 1; ++dy)
      for (int dx = 0; dx <= 1; ++dx)
        if (tx + dx >= 0 && tx + dx < tile && ty + dy >= 0 && ty + dy < tile)
          put(out, offset_x + tx + dx, ty + dy, kYellow);
  }
}

}  // namespace

Bytes build_exhibit(std::span<const std::uint8_t> image_bytes,
                    std::span<const PupilAnnotation> annotations, const ExhibitOptions& options) {
  if (annotations.empty()) throw std::invalid_argument("build_exhibit: no annotations");
  if (options.tile_size <= 0) throw std::invalid_argument("build_exhibit: tile_size must be positive");
  const Image face = decode_image(image_bytes);
  const int tile = options.tile_size;
  Image out(tile * static_cast<int>(annotations.size()), tile, 3);
  for (std::size_t i = 0; i < annotations.size(); ++i)
    render_tile(face, annotations[i], tile, tile * static_cast<int>(i), out);
  return encode_png(out);
}

}  // namespace openeye::pupil
