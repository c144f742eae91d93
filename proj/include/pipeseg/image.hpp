#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace pipeseg {

/// Row-major 8-bit raster, interleaved RGB when channels() == 3.
/// Coordinates are (column x, row y) with the origin at the top-left.
class ImageBuffer {
 public:
  ImageBuffer() = default;
  /// Zero-filled buffer. Throws std::invalid_argument unless width, height >= 1 and channels is 1 or 3.
  ImageBuffer(int width, int height, int channels);
  /// Takes ownership of `samples`, which must hold exactly width * height * channels values.
  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> samples);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }
  bool empty() const noexcept { return samples_.empty(); }

  std::span<const std::uint8_t> samples() const noexcept { return samples_; }
  std::span<std::uint8_t> samples() noexcept { return samples_; }

  std::uint8_t at(int x, int y, int c = 0) const { return samples_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c = 0) { return samples_[index(x, y, c)]; }

  friend bool operator==(const ImageBuffer&, const ImageBuffer&) = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> samples_;
};

/// Real-valued single-channel plane (dark channel, transmission, distance maps).
class Field {
 public:
  Field() = default;
  Field(int width, int height, double fill = 0.0);
  Field(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  double at(int x, int y) const { return values_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return values_[static_cast<std::size_t>(y) * width_ + x]; }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Bilinear resampling with pixel-center alignment and edge clamping.
ImageBuffer resize_bilinear(const ImageBuffer& img, int new_width, int new_height);

/// round(0.299 R + 0.587 G + 0.114 B) computed in integer arithmetic.
std::uint8_t luma_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

/// Single-channel luma plane of an RGB buffer; a copy for single-channel input.
ImageBuffer luma(const ImageBuffer& img);

/// Splits RGB into luma plus full-precision chroma, maps the luma through `f`,
/// and recombines. Chroma is kept in fixed point so gray pixels stay exactly gray.
/// Throws DimensionMismatch if `f` changes the plane size, std::invalid_argument
/// unless img has three channels.
ImageBuffer luma_transform(const ImageBuffer& img,
                           const std::function<ImageBuffer(const ImageBuffer&)>& f);

}  // namespace pipeseg
