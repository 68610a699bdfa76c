#include <doctest.h>

#include <cmath>

#include "openeye/extractor.hpp"
#include "openeye/fixtures.hpp"

using namespace openeye;
using namespace openeye::pupil;

TEST_CASE("default eye crops") {
  const auto l = default_eye_crop(Side::Left, 384, 384);
  const auto r = default_eye_crop(Side::Right, 384, 384);
  CHECK(l.width == 77);
  CHECK(l.height == 77);
  // Centers at 37% / 63% of the width and 47% of the height.
  CHECK(std::abs(l.x + 0.5 * l.width - 0.37 * 384) <= 1.0);
  CHECK(std::abs(r.x + 0.5 * r.width - 0.63 * 384) <= 1.0);
  CHECK(std::abs(l.y + 0.5 * l.height - 0.47 * 384) <= 1.0);
  CHECK(l.y == r.y);
  CHECK(default_eye_crop(Side::Left, 20, 20).width == 8);
  const auto sized = default_eye_crop(Side::Right, 384, 384, 31, 21);
  CHECK(sized.width == 31);
  CHECK(sized.height == 21);
}

TEST_CASE("fill_holes closes interior gaps only") {
  PupilMask m(7, 7);
  for (int y = 1; y <= 5; ++y)
    for (int x = 1; x <= 5; ++x) m.set(x, y);
  m.set(3, 3, false);
  m.set(1, 3, false);  // notch open to the outside
  const auto f = fill_holes(m);
  CHECK(f.get(3, 3));
  CHECK_FALSE(f.get(1, 3));
  CHECK(f.count() == m.count() + 1);
}

TEST_CASE("threshold extractor recovers painted pupils") {
  const ThresholdExtractor ex;
  CHECK(ex.name() == "threshold");
  const auto crop = default_eye_crop(Side::Left, 384, 384);
  const auto left = fixtures::ellipse_pupil({38.2, 37.6, 11, 9.5, 0.7}, crop.width, crop.height);
  fixtures::Blob blob{38, 39, 10, {0.1, -0.08, 0.05, 0.06}, {0.3, 1.2, 2.0, 4.1}};
  const auto right = fixtures::blob_pupil(blob, crop.width, crop.height);
  const Image face = fixtures::render_face(384, left, right, 99);

  const auto got_left = ex.extract(face, default_eye_crop(Side::Left, 384, 384));
  const auto got_right = ex.extract(face, default_eye_crop(Side::Right, 384, 384));
  REQUIRE(got_left.has_value());
  REQUIRE(got_right.has_value());
  CHECK(*got_left == left);
  CHECK(*got_right == right);
}

TEST_CASE("threshold extractor gives up on featureless or out-of-range crops") {
  const ThresholdExtractor ex;
  const Image flat(200, 200, 3, 180);
  CHECK_FALSE(ex.extract(flat, default_eye_crop(Side::Left, 200, 200)).has_value());
  CHECK_FALSE(ex.extract(flat, EyeCrop{190, 190, 40, 40}).has_value());
  CHECK_FALSE(ex.extract(flat, EyeCrop{0, 0, 3, 3}).has_value());

  // A dark region that runs off the crop is not a pupil.
  Image stripe(100, 100, 1, 200);
  for (int y = 0; y < 100; ++y)
    for (int x = 45; x < 55; ++x) stripe.at(x, y)[0] = 10;
  CHECK_FALSE(ex.extract(stripe, EyeCrop{20, 20, 60, 60}).has_value());

  // Too small.
  Image speck(100, 100, 1, 200);
  speck.at(50, 50)[0] = 5;
  speck.at(51, 50)[0] = 5;
  CHECK_FALSE(ex.extract(speck, EyeCrop{20, 20, 60, 60}).has_value());
}
