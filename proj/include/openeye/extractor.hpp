#pragma once

#include <optional>
#include <string>

#include "openeye/image_io.hpp"
#include "openeye/pupil.hpp"

namespace openeye::pupil {

/// Produces a pupil mask for one eye crop of a face image. Returning nullopt
/// means the pupil could not be extracted; callers then mark the image as not
/// eye-extractable.
class PupilExtractor {
 public:
  virtual ~PupilExtractor() = default;
  virtual std::string name() const = 0;
  virtual std::optional<PupilMask> extract(const Image& face, const EyeCrop& crop) const = 0;
};

/// Eye crop for a face aligned the way FFHQ-style corpora are aligned: eye
/// centers at 37%/63% of the width and 47% of the height, with a square crop
/// 20% of the width on a side.
EyeCrop default_eye_crop(Side side, int image_width, int image_height);

/// Crop of the given size centered on the default eye center.
EyeCrop default_eye_crop(Side side, int image_width, int image_height, int crop_width,
                         int crop_height);

/// Best-effort dark-region extractor. Two nested Otsu thresholds separate
/// first the eye interior from sclera and skin, then the pupil from the iris;
/// the pupil is flood-filled from the darkest pixel near the crop center and
/// holes left by specular highlights are filled. Rejects
/// regions that touch the crop border or are smaller than `min_pixels`.
class ThresholdExtractor final : public PupilExtractor {
 public:
  explicit ThresholdExtractor(int min_pixels = 12) : min_pixels_(min_pixels) {}

  std::string name() const override { return "threshold"; }
  std::optional<PupilMask> extract(const Image& face, const EyeCrop& crop) const override;

 private:
  int min_pixels_;
};

/// Fills background regions not connected to the mask border.
PupilMask fill_holes(const PupilMask& mask);

}  // namespace openeye::pupil
