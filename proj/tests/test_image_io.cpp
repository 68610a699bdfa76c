#include <doctest.h>

#include <string>

#include "openeye/error.hpp"
#include "openeye/image_io.hpp"
#include "support.hpp"

using namespace openeye;

namespace {
Bytes bytes_of(const std::string& s) { return {s.begin(), s.end()}; }
}

TEST_CASE("sha256 matches published test vectors") {
  CHECK(sha256_hex(bytes_of("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex(bytes_of("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex(bytes_of("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")) ==
        "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST_CASE("png round trip preserves pixels for gray and rgb") {
  for (int channels : {1, 3}) {
    Image img(13, 7, channels);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 37 % 251);
    const Bytes png = encode_png(img);
    CHECK(sniff_format(png) == ImageFormat::Png);
    CHECK(probe_dimensions(png) == std::pair{13, 7});
    const Image back = decode_image(png);
    CHECK(back.width == 13);
    CHECK(back.height == 7);
    CHECK(back.channels == channels);
    CHECK(back.pixels == img.pixels);
  }
}

TEST_CASE("png encoding is deterministic") {
  Image img(32, 32, 3, 90);
  img.at(3, 4)[1] = 200;
  CHECK(encode_png(img) == encode_png(img));
}

TEST_CASE("jpeg encodes and decodes with the right geometry") {
  Image img(40, 24, 3, 128);
  const Bytes jpg = encode_jpeg(img);
  CHECK(sniff_format(jpg) == ImageFormat::Jpeg);
  CHECK(content_type(ImageFormat::Jpeg) == "image/jpeg");
  CHECK(probe_dimensions(jpg) == std::pair{40, 24});
  const Image back = decode_image(jpg);
  CHECK(back.width == 40);
  CHECK(back.height == 24);
  for (auto v : back.pixels) CHECK(std::abs(int(v) - 128) <= 2);
}

TEST_CASE("unknown bytes are rejected") {
  const Bytes junk = bytes_of("GIF89a not really");
  CHECK(sniff_format(junk) == ImageFormat::Unknown);
  try {
    decode_image(junk);
    FAIL("expected DecodeFailure");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DecodeFailure);
  }
  Bytes truncated = encode_png(Image(8, 8, 1, 3));
  truncated.resize(truncated.size() / 2);
  CHECK_THROWS_AS(decode_image(truncated), Error);
}

TEST_CASE("to_gray uses integer Rec. 601 weights") {
  Image rgb(3, 1, 3);
  const std::uint8_t px[3][3] = {{255, 0, 0}, {0, 255, 0}, {10, 20, 30}};
  for (int x = 0; x < 3; ++x)
    for (int c = 0; c < 3; ++c) rgb.at(x, 0)[c] = px[x][c];
  const Image g = to_gray(rgb);
  REQUIRE(g.channels == 1);
  for (int x = 0; x < 3; ++x) {
    const int expected = (299 * px[x][0] + 587 * px[x][1] + 114 * px[x][2] + 500) / 1000;
    CHECK(int(g.at(x, 0)[0]) == expected);
  }
}

TEST_CASE("file helpers") {
  testing::TempDir dir("io");
  const Bytes data = bytes_of("hello");
  write_file(dir / "a.bin", data);
  CHECK(read_file(dir / "a.bin") == data);
  try {
    read_file(dir / "missing.bin");
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingFile);
  }
}
