#include "pipeseg/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pipeseg/errors.hpp"

namespace pipeseg {

namespace {

void check_shape(int width, int height, int channels) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("image dimensions must be positive, got " + std::to_string(width) +
                                "x" + std::to_string(height));
  }
  if (channels != 1 && channels != 3) {
    throw std::invalid_argument("image must have 1 or 3 channels, got " + std::to_string(channels));
  }
}

std::uint8_t round_clamp(double v) noexcept {
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels)
    : width_(width), height_(height), channels_(channels) {
  check_shape(width, height, channels);
  samples_.assign(static_cast<std::size_t>(width) * height * channels, 0);
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> samples)
    : width_(width), height_(height), channels_(channels), samples_(std::move(samples)) {
  check_shape(width, height, channels);
  if (samples_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw std::invalid_argument("sample count does not match " + std::to_string(width) + "x" +
                                std::to_string(height) + "x" + std::to_string(channels));
  }
}

Field::Field(int width, int height, double fill) : width_(width), height_(height) {
  if (width < 0 || height < 0) throw std::invalid_argument("field dimensions must be nonnegative");
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

Field::Field(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (width < 0 || height < 0 || values_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("field value count does not match its dimensions");
  }
}

ImageBuffer resize_bilinear(const ImageBuffer& img, int new_width, int new_height) {
  if (new_width < 1 || new_height < 1) {
    throw std::invalid_argument("resize target must be at least 1x1");
  }
  if (img.empty()) throw std::invalid_argument("cannot resize an empty buffer");
  if (new_width == img.width() && new_height == img.height()) return img;

  const int channels = img.channels();
  ImageBuffer out(new_width, new_height, channels);

  struct Tap {
    int lo, hi;
    double frac;
  };
  auto taps = [](int dst_size, int src_size) {
    std::vector<Tap> t(dst_size);
    const double scale = static_cast<double>(src_size) / dst_size;
    for (int i = 0; i < dst_size; ++i) {
      double s = std::clamp((i + 0.5) * scale - 0.5, 0.0, static_cast<double>(src_size - 1));
      int lo = static_cast<int>(std::floor(s));
      int hi = std::min(lo + 1, src_size - 1);
      t[i] = {lo, hi, s - lo};
    }
    return t;
  };
  const auto xt = taps(new_width, img.width());
  const auto yt = taps(new_height, img.height());

  for (int y = 0; y < new_height; ++y) {
    const Tap& ty = yt[y];
    for (int x = 0; x < new_width; ++x) {
      const Tap& tx = xt[x];
      for (int c = 0; c < channels; ++c) {
        double top = img.at(tx.lo, ty.lo, c) * (1.0 - tx.frac) + img.at(tx.hi, ty.lo, c) * tx.frac;
        double bot = img.at(tx.lo, ty.hi, c) * (1.0 - tx.frac) + img.at(tx.hi, ty.hi, c) * tx.frac;
        out.at(x, y, c) = round_clamp(top * (1.0 - ty.frac) + bot * ty.frac);
      }
    }
  }
  return out;
}

std::uint8_t luma_of(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  return static_cast<std::uint8_t>((299 * r + 587 * g + 114 * b + 500) / 1000);
}

ImageBuffer luma(const ImageBuffer& img) {
  if (img.channels() == 1) return img;
  if (img.channels() != 3) throw std::invalid_argument("luma needs a 1- or 3-channel image");
  ImageBuffer out(img.width(), img.height(), 1);
  auto src = img.samples();
  auto dst = out.samples();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = luma_of(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
  }
  return out;
}

ImageBuffer luma_transform(const ImageBuffer& img,
                           const std::function<ImageBuffer(const ImageBuffer&)>& f) {
  if (img.channels() != 3) throw std::invalid_argument("luma_transform needs a 3-channel image");

  // Chroma in Q16; the coefficient rows sum to zero so r == g == b gives zero chroma.
  const std::size_t n = img.pixel_count();
  std::vector<std::int32_t> cb(n), cr(n);
  auto src = img.samples();
  for (std::size_t i = 0; i < n; ++i) {
    const int r = src[3 * i], g = src[3 * i + 1], b = src[3 * i + 2];
    cb[i] = -11059 * r - 21709 * g + 32768 * b;
    cr[i] = 32768 * r - 27439 * g - 5329 * b;
  }

  const ImageBuffer y_in = luma(img);
  const ImageBuffer y_out = f(y_in);
  if (y_out.width() != img.width() || y_out.height() != img.height() || y_out.channels() != 1) {
    throw DimensionMismatch("luma function changed the plane dimensions");
  }

  ImageBuffer out(img.width(), img.height(), 3);
  auto dst = out.samples();
  auto yv = y_out.samples();
  constexpr double q = 1.0 / 65536.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double yy = yv[i];
    const double u = cb[i] * q;
    const double v = cr[i] * q;
    dst[3 * i] = round_clamp(yy + 1.402 * v);
    dst[3 * i + 1] = round_clamp(yy - 0.344136 * u - 0.714136 * v);
    dst[3 * i + 2] = round_clamp(yy + 1.772 * u);
  }
  return out;
}

}  // namespace pipeseg
