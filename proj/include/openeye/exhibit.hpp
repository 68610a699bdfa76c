#pragma once

#include <span>

#include "openeye/image_io.hpp"
#include "openeye/pupil.hpp"

namespace openeye::pupil {

struct ExhibitOptions {
  int tile_size = 192;  // each zoomed eye crop is tile_size x tile_size
};

/// Renders one zoomed tile per annotation, left to right: the eye crop scaled
/// up with nearest-neighbor sampling, the mask outline in red and the fitted
/// ellipse in yellow. The result is a PNG of (n * tile_size) x tile_size.
Bytes build_exhibit(std::span<const std::uint8_t> image_bytes,
                    std::span<const PupilAnnotation> annotations,
                    const ExhibitOptions& options = {});

}  // namespace openeye::pupil
