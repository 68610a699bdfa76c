#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace openeye::pupil {

/// Integer pixel position; x is the column and y the row. Pixel centers sit on
/// integer coordinates, so a Pixel converts to a Point2 without offset.
struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

/// Binary pupil mask, row-major. `true` marks a pupil pixel.
class PupilMask {
 public:
  PupilMask() = default;
  PupilMask(int width, int height);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  bool get(int x, int y) const {
    return bits_[static_cast<std::size_t>(y) * width_ + x] != 0;
  }
  /// Out-of-bounds reads are false.
  bool get_or_false(int x, int y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_ && get(x, y);
  }
  void set(int x, int y, bool value = true) {
    bits_[static_cast<std::size_t>(y) * width_ + x] = value ? 1 : 0;
  }

  std::size_t count() const;
  bool empty() const { return count() == 0; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }

  friend bool operator==(const PupilMask&, const PupilMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Geometric ellipse: center, semi-axes a >= b > 0, and rotation of the major
/// axis from +x in [0, pi). Circles (|a-b|/a < 1e-6) report theta = 0.
struct Ellipse {
  double cx = 0.0;
  double cy = 0.0;
  double a = 0.0;
  double b = 0.0;
  double theta = 0.0;
};

/// Value of the normalized quadratic form; <= 1 means inside.
double ellipse_level(const Ellipse& e, double x, double y);

/// Point at eccentric anomaly t.
Point2 ellipse_point(const Ellipse& e, double t);

/// Pixels of `mask` with at least one 4-neighbor that is false or outside.
PupilMask boundary_pixels(const PupilMask& mask);

/// Largest 8-connected component; ties keep the component found first in
/// raster order.
PupilMask largest_component(const PupilMask& mask);

/// Boundary of the largest component, ordered by Moore-neighbor contour
/// traversal. Boundary pixels the outer trace never reaches (hole rims)
/// follow in greedy 8-connected walks.
std::vector<Pixel> extract_boundary(const PupilMask& mask);

/// Direct least-squares ellipse fit: the conic minimizing algebraic distance
/// under 4AC - B^2 = 1, solved as a reduced 3x3 eigenproblem after centering
/// the points and scaling them to RMS radius sqrt(2). Three or more collinear
/// points fail with DegenerateConfiguration, fewer than five with
/// InsufficientPoints.
Ellipse fit_ellipse(std::span<const Point2> points);
Ellipse fit_ellipse(std::span<const Pixel> points);

/// Pixel (x, y) is set iff its center satisfies ellipse_level <= 1.
PupilMask rasterize_ellipse(const Ellipse& e, int width, int height);

/// IoU of the boundary bands of two masks. A band is the mask's boundary
/// dilated by a (2d+1)x(2d+1) square, clipped to the mask itself.
double boundary_iou(const PupilMask& m1, const PupilMask& m2, int dilation);

struct PupilScore {
  Ellipse fitted;
  double biou = 0.0;
};

/// Added to both semi-axes of the boundary-pixel fit so the ellipse follows
/// the region edge rather than the centers of the outermost pixels.
inline constexpr double kEdgeOffset = 0.5;

/// Fits an ellipse to the mask boundary, widens it by kEdgeOffset, and scores
/// how well the mask agrees with the rasterized result.
PupilScore score_pupil(const PupilMask& mask, int dilation);

struct FaceScore {
  std::string image_id;
  std::optional<double> left;
  std::optional<double> right;
  double aggregate = 0.0;
};

/// Mean of the per-eye scores that are present. Throws NoEyes if neither is.
FaceScore combine_eyes(std::string image_id, std::optional<double> left,
                       std::optional<double> right);

FaceScore score_face(const std::optional<PupilMask>& left,
                     const std::optional<PupilMask>& right, int dilation,
                     std::string image_id = {});

/// Threshold halfway between the mean real-face and mean fake-face scores.
double calibrate_tau(std::span<const double> real_scores, std::span<const double> fake_scores);

enum class Side { Left, Right };

std::string_view to_string(Side side);

/// Eye region in face-image pixel coordinates; masks are expressed in crop
/// coordinates with the crop's dimensions.
struct EyeCrop {
  int x = 0;
  int y = 0;
  int width = 0;
  int height = 0;
  friend bool operator==(const EyeCrop&, const EyeCrop&) = default;
};

struct PupilAnnotation {
  std::string image_id;
  Side side = Side::Left;
  EyeCrop crop;
  PupilMask mask;
  Ellipse fitted;
  double biou = 0.0;
};

inline constexpr int kDefaultDilation = 2;

}  // namespace openeye::pupil
