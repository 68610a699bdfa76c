#include "openeye/pupil.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "openeye/error.hpp"

namespace openeye::pupil {

std::string_view to_string(Side side) { return side == Side::Left ? "left" : "right"; }

PupilMask::PupilMask(int width, int height)
    : width_(width), height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), 0) {}

std::size_t PupilMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

double ellipse_level(const Ellipse& e, double x, double y) {
  const double dx = x - e.cx;
  const double dy = y - e.cy;
  const double c = std::cos(e.theta);
  const double s = std::sin(e.theta);
  const double u = (dx * c + dy * s) / e.a;
  const double v = (-dx * s + dy * c) / e.b;
  return u * u + v * v;
}

Point2 ellipse_point(const Ellipse& e, double t) {
  const double c = std::cos(e.theta);
  const double s = std::sin(e.theta);
  const double u = e.a * std::cos(t);
  const double v = e.b * std::sin(t);
  return {e.cx + u * c - v * s, e.cy + u * s + v * c};
}

namespace {

bool is_boundary(const PupilMask& m, int x, int y) {
  return m.get(x, y) && (!m.get_or_false(x - 1, y) || !m.get_or_false(x + 1, y) ||
                         !m.get_or_false(x, y - 1) || !m.get_or_false(x, y + 1));
}

void require_nonempty(const PupilMask& mask) {
  if (mask.width() <= 0 || mask.height() <= 0 || mask.empty())
    throw Error(Errc::EmptyMask, "mask has no pupil pixels");
}

// Clockwise on screen (y grows downward), starting west.
constexpr std::array<Pixel, 8> kMoore = {{
    {-1, 0}, {-1, -1}, {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1},
}};

int moore_index(int dx, int dy) {
  for (int i = 0; i < 8; ++i)
    if (kMoore[i].x == dx && kMoore[i].y == dy) return i;
  return -1;
}

}  // namespace

PupilMask boundary_pixels(const PupilMask& mask) {
  PupilMask out(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (is_boundary(mask, x, y)) out.set(x, y);
  return out;
}

PupilMask largest_component(const PupilMask& mask) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> label(static_cast<std::size_t>(w) * h, -1);
  std::vector<std::size_t> sizes;
  std::vector<Pixel> stack;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.get(x, y) || label[static_cast<std::size_t>(y) * w + x] >= 0) continue;
      const int id = static_cast<int>(sizes.size());
      std::size_t size = 0;
      stack.push_back({x, y});
      label[static_cast<std::size_t>(y) * w + x] = id;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        ++size;
        for (const Pixel& d : kMoore) {
          const int nx = p.x + d.x;
          const int ny = p.y + d.y;
          if (!mask.get_or_false(nx, ny)) continue;
          int& l = label[static_cast<std::size_t>(ny) * w + nx];
          if (l >= 0) continue;
          l = id;
          stack.push_back({nx, ny});
        }
      }
      sizes.push_back(size);
    }
  }
  PupilMask out(w, h);
  if (sizes.empty()) return out;
  const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (label[static_cast<std::size_t>(y) * w + x] == best) out.set(x, y);
  return out;
}

std::vector<Pixel> extract_boundary(const PupilMask& mask) {
  require_nonempty(mask);
  const PupilMask comp = largest_component(mask);
  const PupilMask edge = boundary_pixels(comp);
  const int w = comp.width();

  std::vector<std::uint8_t> emitted(static_cast<std::size_t>(w) * comp.height(), 0);
  std::vector<Pixel> out;
  out.reserve(edge.count());
  auto emit = [&](Pixel p) {
    auto& flag = emitted[static_cast<std::size_t>(p.y) * w + p.x];
    if (flag || !edge.get(p.x, p.y)) return;
    flag = 1;
    out.push_back(p);
  };

  // Raster-first pixel: its west neighbor is background.
  Pixel start{-1, -1};
  for (int y = 0; y < comp.height() && start.x < 0; ++y)
    for (int x = 0; x < w; ++x)
      if (comp.get(x, y)) {
        start = {x, y};
        break;
      }

  // Moore-neighbor tracing with Jacob's stopping criterion.
  emit(start);
  Pixel current = start;
  int backtrack = 0;  // direction from current to the background pixel we entered from
  const int start_backtrack = backtrack;
  const std::size_t step_cap = 8 * comp.count() + 16;
  for (std::size_t steps = 0; steps < step_cap; ++steps) {
    int found = -1;
    for (int k = 1; k <= 8; ++k) {
      const int dir = (backtrack + k) % 8;
      if (comp.get_or_false(current.x + kMoore[dir].x, current.y + kMoore[dir].y)) {
        found = dir;
        break;
      }
    }
    if (found < 0) break;  // isolated pixel
    const Pixel next{current.x + kMoore[found].x, current.y + kMoore[found].y};
    // The neighbor examined just before `next` is background; re-express it
    // relative to `next`.
    const int prev_dir = (found + 7) % 8;
    const Pixel bg{current.x + kMoore[prev_dir].x, current.y + kMoore[prev_dir].y};
    backtrack = moore_index(bg.x - next.x, bg.y - next.y);
    current = next;
    if (current == start && backtrack == start_backtrack) break;
    emit(current);
  }

  // Boundary pixels not on the outer contour (hole rims).
  for (int y = 0; y < comp.height(); ++y) {
    for (int x = 0; x < w; ++x) {
      if (!edge.get(x, y) || emitted[static_cast<std::size_t>(y) * w + x]) continue;
      Pixel p{x, y};
      emit(p);
      for (bool moved = true; moved;) {
        moved = false;
        for (const Pixel& d : kMoore) {
          const Pixel n{p.x + d.x, p.y + d.y};
          if (edge.get_or_false(n.x, n.y) && !emitted[static_cast<std::size_t>(n.y) * w + n.x]) {
            emit(n);
            p = n;
            moved = true;
            break;
          }
        }
      }
    }
  }
  return out;
}

namespace {

constexpr double kCircleTolerance = 1e-6;

// Conic A x^2 + B xy + C y^2 + D x + E y + F = 0 to geometric parameters.
Ellipse conic_to_ellipse(double A, double B, double C, double D, double E, double F) {
  if (A + C < 0) {
    A = -A; B = -B; C = -C; D = -D; E = -E; F = -F;
  }
  const double disc = B * B - 4.0 * A * C;
  if (!(disc < 0.0)) throw Error(Errc::DegenerateConfiguration, "conic is not an ellipse");
  const double cx = (2.0 * C * D - B * E) / disc;
  const double cy = (2.0 * A * E - B * D) / disc;
  const double f0 = F + 0.5 * (D * cx + E * cy);  // conic value at the center
  const double mean = 0.5 * (A + C);
  const double radius = std::hypot(0.5 * (A - C), 0.5 * B);
  const double lambda_max = mean + radius;
  // Product identity avoids cancellation in the small eigenvalue.
  const double lambda_min = (A * C - 0.25 * B * B) / lambda_max;
  if (!(f0 < 0.0) || !(lambda_min > 0.0))
    throw Error(Errc::DegenerateConfiguration, "conic has no real ellipse");

  Ellipse e;
  e.cx = cx;
  e.cy = cy;
  e.a = std::sqrt(-f0 / lambda_min);
  e.b = std::sqrt(-f0 / lambda_max);
  if ((e.a - e.b) / e.a < kCircleTolerance) {
    e.theta = 0.0;
  } else {
    // 0.5*atan2(B, A-C) is the direction of the larger eigenvalue (minor
    // axis); the major axis is perpendicular to it.
    double theta = 0.5 * std::atan2(B, A - C) + 0.5 * std::numbers::pi;
    theta = std::fmod(theta, std::numbers::pi);
    if (theta < 0.0) theta += std::numbers::pi;
    if (theta >= std::numbers::pi) theta -= std::numbers::pi;
    e.theta = theta;
  }
  return e;
}

}  // namespace

namespace {

bool collinear(std::span<const Point2> points) {
  const Point2 p0 = points.front();
  std::size_t far = 0;
  double far_d2 = 0.0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    const double d2 = (points[i].x - p0.x) * (points[i].x - p0.x) + (points[i].y - p0.y) * (points[i].y - p0.y);
    if (d2 > far_d2) {
      far_d2 = d2;
      far = i;
    }
  }
  if (far_d2 == 0.0) return true;
  const double dx = points[far].x - p0.x, dy = points[far].y - p0.y;
  const double len = std::sqrt(far_d2);
  for (const auto& p : points)
    if (std::abs(dx * (p.y - p0.y) - dy * (p.x - p0.x)) / len > 1e-9 * len) return false;
  return true;
}

}  // namespace

Ellipse fit_ellipse(std::span<const Point2> points) {
  const std::size_t n = points.size();
  if (n >= 3 && collinear(points)) throw Error(Errc::DegenerateConfiguration, "points are collinear");
  if (n < 5) throw Error(Errc::InsufficientPoints, "ellipse fit needs at least 5 points");

  double mx = 0.0, my = 0.0;
  for (const auto& p : points) {
    mx += p.x;
    my += p.y;
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double ms = 0.0;
  for (const auto& p : points) ms += (p.x - mx) * (p.x - mx) + (p.y - my) * (p.y - my);
  const double rms = std::sqrt(ms / static_cast<double>(n));
  if (!(rms > 0.0)) throw Error(Errc::DegenerateConfiguration, "all points coincide");
  const double scale = rms / std::numbers::sqrt2;

  Eigen::MatrixX3d quad(n, 3);
  Eigen::MatrixX3d lin(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = (points[i].x - mx) / scale;
    const double y = (points[i].y - my) / scale;
    const auto r = static_cast<Eigen::Index>(i);
    quad.row(r) << x * x, x * y, y * y;
    lin.row(r) << x, y, 1.0;
  }
  const Eigen::Matrix3d s1 = quad.transpose() * quad;
  const Eigen::Matrix3d s2 = quad.transpose() * lin;
  const Eigen::Matrix3d s3 = lin.transpose() * lin;

  Eigen::FullPivLU<Eigen::Matrix3d> s3_lu(s3);
  s3_lu.setThreshold(1e-10);
  if (s3_lu.rank() < 3) throw Error(Errc::DegenerateConfiguration, "points are collinear");

  const Eigen::Matrix3d t = -s3_lu.solve(s2.transpose());
  const Eigen::Matrix3d reduced = s1 + s2 * t;
  // Inverse of the constraint block for 4AC - B^2.
  Eigen::Matrix3d c1_inv;
  c1_inv << 0.0, 0.0, 0.5,
            0.0, -1.0, 0.0,
            0.5, 0.0, 0.0;
  const Eigen::Matrix3d m = c1_inv * reduced;

  Eigen::EigenSolver<Eigen::Matrix3d> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error(Errc::DegenerateConfiguration, "eigen decomposition failed");

  int best = -1;
  double best_value = 0.0;
  for (int k = 0; k < 3; ++k) {
    const Eigen::Vector3d v = solver.eigenvectors().col(k).real();
    const double constraint = 4.0 * v(0) * v(2) - v(1) * v(1);
    if (!(constraint > 0.0)) continue;
    const double value = solver.eigenvalues()(k).real();
    if (best < 0 || value < best_value) {
      best = k;
      best_value = value;
    }
  }
  if (best < 0) throw Error(Errc::DegenerateConfiguration, "no elliptical solution");

  const Eigen::Vector3d a1 = solver.eigenvectors().col(best).real();
  const Eigen::Vector3d a2 = t * a1;
  Ellipse e = conic_to_ellipse(a1(0), a1(1), a1(2), a2(0), a2(1), a2(2));
  e.cx = e.cx * scale + mx;
  e.cy = e.cy * scale + my;
  e.a *= scale;
  e.b *= scale;
  return e;
}

Ellipse fit_ellipse(std::span<const Pixel> points) {
  std::vector<Point2> converted;
  converted.reserve(points.size());
  for (const auto& p : points) converted.push_back({static_cast<double>(p.x), static_cast<double>(p.y)});
  return fit_ellipse(std::span<const Point2>(converted));
}

PupilMask rasterize_ellipse(const Ellipse& e, int width, int height) {
  PupilMask out(width, height);
  if (!(e.a > 0.0) || !(e.b > 0.0)) return out;
  // Scan only the bounding box.
  const double c = std::cos(e.theta);
  const double s = std::sin(e.theta);
  const double half_w = std::hypot(e.a * c, e.b * s);
  const double half_h = std::hypot(e.a * s, e.b * c);
  const int x0 = std::max(0, static_cast<int>(std::floor(e.cx - half_w)) - 1);
  const int x1 = std::min(width - 1, static_cast<int>(std::ceil(e.cx + half_w)) + 1);
  const int y0 = std::max(0, static_cast<int>(std::floor(e.cy - half_h)) - 1);
  const int y1 = std::min(height - 1, static_cast<int>(std::ceil(e.cy + half_h)) + 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (ellipse_level(e, x, y) <= 1.0) out.set(x, y);
  return out;
}

namespace {

PupilMask boundary_band(const PupilMask& mask, int dilation) {
  const PupilMask edge = boundary_pixels(mask);
  PupilMask band(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      if (!edge.get(x, y)) continue;
      const int ya = std::max(0, y - dilation), yb = std::min(mask.height() - 1, y + dilation);
      const int xa = std::max(0, x - dilation), xb = std::min(mask.width() - 1, x + dilation);
      for (int yy = ya; yy <= yb; ++yy)
        for (int xx = xa; xx <= xb; ++xx)
          if (mask.get(xx, yy)) band.set(xx, yy);
    }
  }
  return band;
}

}  // namespace

double boundary_iou(const PupilMask& m1, const PupilMask& m2, int dilation) {
  if (m1.width() != m2.width() || m1.height() != m2.height())
    throw Error(Errc::DimensionMismatch, "boundary_iou: masks differ in size");
  require_nonempty(m1);
  require_nonempty(m2);
  if (dilation < 0) throw std::invalid_argument("boundary_iou: negative dilation");
  const PupilMask b1 = boundary_band(m1, dilation);
  const PupilMask b2 = boundary_band(m2, dilation);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < b1.bits().size(); ++i) {
    inter += b1.bits()[i] & b2.bits()[i];
    uni += b1.bits()[i] | b2.bits()[i];
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

PupilScore score_pupil(const PupilMask& mask, int dilation) {
  const std::vector<Pixel> boundary = extract_boundary(mask);
  PupilScore score;
  score.fitted = fit_ellipse(std::span<const Pixel>(boundary));
  // Boundary pixel centers sit about half a pixel inside the region edge.
  score.fitted.a += kEdgeOffset;
  score.fitted.b += kEdgeOffset;
  const PupilMask fitted_mask = rasterize_ellipse(score.fitted, mask.width(), mask.height());
  if (fitted_mask.empty())
    throw Error(Errc::DegenerateConfiguration, "fitted ellipse covers no pixel centers");
  score.biou = boundary_iou(mask, fitted_mask, dilation);
  return score;
}

FaceScore combine_eyes(std::string image_id, std::optional<double> left,
                       std::optional<double> right) {
  if (!left && !right) throw Error(Errc::NoEyes, "no eye scores for " + image_id);
  FaceScore face{std::move(image_id), left, right, 0.0};
  if (left && right)
    face.aggregate = 0.5 * (*left + *right);
  else
    face.aggregate = left ? *left : *right;
  return face;
}

FaceScore score_face(const std::optional<PupilMask>& left, const std::optional<PupilMask>& right,
                     int dilation, std::string image_id) {
  std::optional<double> l, r;
  if (left) l = score_pupil(*left, dilation).biou;
  if (right) r = score_pupil(*right, dilation).biou;
  return combine_eyes(std::move(image_id), l, r);
}

double calibrate_tau(std::span<const double> real_scores, std::span<const double> fake_scores) {
  if (real_scores.empty() || fake_scores.empty())
    throw std::invalid_argument("calibrate_tau: both score sets must be non-empty");
  const double real_mean =
      std::accumulate(real_scores.begin(), real_scores.end(), 0.0) / static_cast<double>(real_scores.size());
  const double fake_mean =
      std::accumulate(fake_scores.begin(), fake_scores.end(), 0.0) / static_cast<double>(fake_scores.size());
  return 0.5 * (real_mean + fake_mean);
}

}  // namespace openeye::pupil
