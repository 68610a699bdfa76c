#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace openeye {

using Bytes = std::vector<std::uint8_t>;

/// Lowercase hex SHA-256 of `data` (64 characters).
std::string sha256_hex(std::span<const std::uint8_t> data);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> data);

enum class ImageFormat { Png, Jpeg, Unknown };

ImageFormat sniff_format(std::span<const std::uint8_t> data);
std::string_view content_type(ImageFormat format);
std::string_view extension(ImageFormat format);

/// Interleaved 8-bit image with 1 (gray) or 3 (RGB) channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        pixels(static_cast<std::size_t>(w) * h * c, fill) {}

  std::uint8_t* at(int x, int y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * channels;
  }
  bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
};

/// Decodes PNG or JPEG into gray (1 channel) or RGB (3 channels). Alpha and
/// palette inputs are converted to RGB; 16-bit input is stripped to 8 bits.
/// Throws Error{DecodeFailure} on malformed data or unsupported formats.
Image decode_image(std::span<const std::uint8_t> data);

/// Reads only the header to report (width, height).
std::pair<int, int> probe_dimensions(std::span<const std::uint8_t> data);

/// Deterministic PNG encoding (fixed compression settings, no timestamps).
Bytes encode_png(const Image& image);

Bytes encode_jpeg(const Image& image, int quality = 92);

/// Luma conversion (Rec. 601 integer weights); gray input is copied.
Image to_gray(const Image& image);

}  // namespace openeye
