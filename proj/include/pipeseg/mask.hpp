#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pipeseg/image.hpp"

namespace pipeseg {

/// Row-major foreground flags on a width x height canvas.
class BinaryMask {
 public:
  BinaryMask() = default;
  BinaryMask(int width, int height);
  /// `bits` holds width*height flags; any nonzero value counts as foreground.
  BinaryMask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  void set(int x, int y, bool on = true) { bits_[static_cast<std::size_t>(y) * width_ + x] = on; }
  bool test(std::size_t linear) const { return bits_[linear] != 0; }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::span<std::uint8_t> bits() noexcept { return bits_; }

  std::size_t foreground_count() const noexcept;
  bool empty() const noexcept { return foreground_count() == 0; }
  bool same_shape(const BinaryMask& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct Point2d {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2d&, const Point2d&) = default;
};

struct PixelPoint {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const PixelPoint&, const PixelPoint&) = default;
};

/// Single closed ring; the last vertex connects back to the first.
struct PolygonContour {
  std::vector<Point2d> vertices;
};

/// Boundary pixels of a mask, row-major order.
struct BoundarySet {
  int width = 0;
  int height = 0;
  std::vector<PixelPoint> points;

  bool empty() const noexcept { return points.empty(); }
};

/// Per-pixel Euclidean distance to the nearest seed.
using DistanceField = Field;

/// Even-odd scanline fill; a pixel is foreground iff its center (x+0.5, y+0.5) lies inside.
/// Parts of the polygon outside the canvas are clipped. Throws std::invalid_argument for
/// fewer than three vertices or a non-positive canvas.
BinaryMask rasterize_polygon(const PolygonContour& poly, int width, int height);

/// Foreground pixels with at least one 4-neighbour that is background or off-canvas.
BoundarySet extract_boundary(const BinaryMask& mask);

/// Exact Euclidean distance transform (separable lower-envelope algorithm).
/// Throws std::invalid_argument when there are no seeds.
DistanceField distance_transform(const BoundarySet& seeds);
DistanceField distance_transform(const BinaryMask& seeds);
DistanceField distance_transform(std::span<const PixelPoint> seeds, int width, int height);

/// Squared distances, exact integers; the building block of distance_transform.
std::vector<std::int64_t> squared_distance_transform(const BinaryMask& seeds);

/// Pixelwise OR. Throws std::invalid_argument for an empty list, DimensionMismatch otherwise.
BinaryMask mask_union(std::span<const BinaryMask> masks);

/// Square-window dilation with the given radius (radius 0 returns the input).
BinaryMask dilate(const BinaryMask& mask, int radius);

/// Run-length code: row-major, first run is background, runs alternate.
/// Throws DataError when the counts do not sum to width*height.
BinaryMask decode_rle(std::span<const std::int64_t> counts, int width, int height);
std::vector<std::int64_t> encode_rle(const BinaryMask& mask);

/// Shoelace area (absolute value) of a polygon ring.
double polygon_area(const PolygonContour& poly) noexcept;

/// Masks stored as images use 0 for background and 255 for foreground.
BinaryMask mask_from_image(const ImageBuffer& img);
ImageBuffer mask_to_image(const BinaryMask& mask);

}  // namespace pipeseg
