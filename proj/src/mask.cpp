#include "pipeseg/mask.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "pipeseg/errors.hpp"

namespace pipeseg {

BinaryMask::BinaryMask(int width, int height) : width_(width), height_(height) {
  if (width < 1 || height < 1) throw std::invalid_argument("mask dimensions must be positive");
  bits_.assign(static_cast<std::size_t>(width) * height, 0);
}

BinaryMask::BinaryMask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width < 1 || height < 1) throw std::invalid_argument("mask dimensions must be positive");
  if (bits_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("mask bit count does not match its dimensions");
  }
  for (auto& b : bits_) b = b != 0;
}

std::size_t BinaryMask::foreground_count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryMask rasterize_polygon(const PolygonContour& poly, int width, int height) {
  const auto& v = poly.vertices;
  if (v.size() < 3) {
    throw std::invalid_argument("polygon needs at least 3 vertices, got " + std::to_string(v.size()));
  }
  BinaryMask mask(width, height);
  std::vector<double> crossings;
  crossings.reserve(v.size());

  for (int y = 0; y < height; ++y) {
    const double yc = y + 0.5;
    crossings.clear();
    for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
      const Point2d& a = v[j];
      const Point2d& b = v[i];
      // Half-open in y so a vertex on the scanline is counted once.
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) {
        crossings.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    for (std::size_t k = 0; k + 1 < crossings.size(); k += 2) {
      // Centers x+0.5 in [left, right).
      const double left = std::ceil(crossings[k] - 0.5);
      const double right = std::ceil(crossings[k + 1] - 0.5);
      const int x0 = static_cast<int>(std::clamp(left, 0.0, static_cast<double>(width)));
      const int x1 = static_cast<int>(std::clamp(right, 0.0, static_cast<double>(width)));
      for (int x = x0; x < x1; ++x) mask.set(x, y);
    }
  }
  return mask;
}

BoundarySet extract_boundary(const BinaryMask& mask) {
  BoundarySet out{mask.width(), mask.height(), {}};
  const int w = mask.width(), h = mask.height();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      const bool edge = x == 0 || y == 0 || x == w - 1 || y == h - 1 || !mask.at(x - 1, y) ||
                        !mask.at(x + 1, y) || !mask.at(x, y - 1) || !mask.at(x, y + 1);
      if (edge) out.points.push_back({x, y});
    }
  }
  return out;
}

BinaryMask mask_union(std::span<const BinaryMask> masks) {
  if (masks.empty()) throw std::invalid_argument("mask_union needs at least one mask");
  BinaryMask out = masks.front();
  for (const auto& m : masks.subspan(1)) {
    if (!m.same_shape(out)) throw DimensionMismatch("mask_union: masks differ in size");
    auto dst = out.bits();
    auto src = m.bits();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  }
  return out;
}

BinaryMask dilate(const BinaryMask& mask, int radius) {
  if (radius < 0) throw std::invalid_argument("dilation radius must be nonnegative");
  if (radius == 0) return mask;
  const int w = mask.width(), h = mask.height();
  // Separable: horizontal then vertical max.
  BinaryMask tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!mask.at(x, y)) continue;
      for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx) tmp.set(xx, y);
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!tmp.at(x, y)) continue;
      for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy) out.set(x, yy);
    }
  }
  return out;
}

BinaryMask decode_rle(std::span<const std::int64_t> counts, int width, int height) {
  BinaryMask mask(width, height);
  const auto total = static_cast<std::int64_t>(mask.size());
  std::int64_t pos = 0;
  bool fg = false;
  for (std::int64_t run : counts) {
    if (run < 0) throw DataError("RLE counts must be nonnegative");
    if (run > total - pos) {
      throw DataError("RLE counts exceed the " + std::to_string(width) + "x" +
                      std::to_string(height) + " canvas");
    }
    if (fg) std::fill_n(mask.bits().begin() + pos, run, std::uint8_t{1});
    pos += run;
    fg = !fg;
  }
  if (pos != total) {
    throw DataError("RLE counts sum to " + std::to_string(pos) + ", expected " + std::to_string(total));
  }
  return mask;
}

std::vector<std::int64_t> encode_rle(const BinaryMask& mask) {
  std::vector<std::int64_t> counts;
  std::uint8_t current = 0;
  std::int64_t run = 0;
  for (std::uint8_t b : mask.bits()) {
    if (b != current) {
      counts.push_back(run);
      run = 0;
      current = b;
    }
    ++run;
  }
  counts.push_back(run);
  return counts;
}

double polygon_area(const PolygonContour& poly) noexcept {
  const auto& v = poly.vertices;
  if (v.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    twice += v[j].x * v[i].y - v[i].x * v[j].y;
  }
  return std::abs(twice) * 0.5;
}

BinaryMask mask_from_image(const ImageBuffer& img) {
  if (img.channels() != 1) throw DataError("mask images must be single-channel");
  std::vector<std::uint8_t> bits(img.samples().begin(), img.samples().end());
  return BinaryMask(img.width(), img.height(), std::move(bits));
}

ImageBuffer mask_to_image(const BinaryMask& mask) {
  std::vector<std::uint8_t> samples(mask.size());
  std::transform(mask.bits().begin(), mask.bits().end(), samples.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
  return ImageBuffer(mask.width(), mask.height(), 1, std::move(samples));
}

}  // namespace pipeseg
