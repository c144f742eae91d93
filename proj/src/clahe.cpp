#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pipeseg/enhance.hpp"

namespace pipeseg {

namespace {

struct TileSpan {
  int begin;
  int end;
  double center;  // in pixel-center coordinates, i.e. pixel x sits at x + 0.5
};

std::vector<TileSpan> partition(int size, int tiles) {
  std::vector<TileSpan> spans(tiles);
  for (int i = 0; i < tiles; ++i) {
    const int b = static_cast<int>(static_cast<long long>(i) * size / tiles);
    const int e = static_cast<int>(static_cast<long long>(i + 1) * size / tiles);
    spans[i] = {b, e, 0.5 * (b + e)};
  }
  return spans;
}

// Blend taps along one axis: weight of the upper tile and the two tile indices.
struct AxisTap {
  int lo;
  int hi;
  double w;
};

std::vector<AxisTap> axis_taps(int size, const std::vector<TileSpan>& spans) {
  std::vector<AxisTap> taps(size);
  const int n = static_cast<int>(spans.size());
  int lo = 0;
  for (int x = 0; x < size; ++x) {
    const double p = x + 0.5;
    while (lo + 1 < n && spans[lo + 1].center <= p) ++lo;
    if (p <= spans[0].center) {
      taps[x] = {0, 0, 0.0};
    } else if (lo == n - 1) {
      taps[x] = {n - 1, n - 1, 0.0};
    } else {
      const double w = (p - spans[lo].center) / (spans[lo + 1].center - spans[lo].center);
      taps[x] = {lo, lo + 1, w};
    }
  }
  return taps;
}

std::array<std::uint8_t, 256> tile_lut(const ImageBuffer& plane, const TileSpan& xs,
                                       const TileSpan& ys, const ClaheConfig& cfg) {
  const int bins = cfg.bins;
  std::vector<long long> hist(bins, 0);
  auto bin_of = [bins](int v) { return v * bins / 256; };
  for (int y = ys.begin; y < ys.end; ++y) {
    for (int x = xs.begin; x < xs.end; ++x) ++hist[bin_of(plane.at(x, y))];
  }
  const long long pixels = static_cast<long long>(xs.end - xs.begin) * (ys.end - ys.begin);

  if (std::isfinite(cfg.clip_limit)) {
    const double raw = cfg.clip_limit * static_cast<double>(pixels) / bins;
    const long long limit = std::max<long long>(1, static_cast<long long>(std::floor(raw)));
    long long excess = 0;
    for (auto& h : hist) {
      if (h > limit) {
        excess += h - limit;
        h = limit;
      }
    }
    // Single uniform pass; the remainder of excess / bins is dropped.
    const long long share = excess / bins;
    for (auto& h : hist) h += share;
  }

  long long total = 0;
  for (long long h : hist) total += h;
  std::vector<std::uint8_t> bin_lut(bins);
  long long cdf = 0;
  for (int b = 0; b < bins; ++b) {
    cdf += hist[b];
    const double v = total > 0 ? 255.0 * static_cast<double>(cdf) / static_cast<double>(total) : 0.0;
    bin_lut[b] = static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5), 0.0, 255.0));
  }
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[v] = bin_lut[bin_of(v)];
  return lut;
}

ImageBuffer clahe_plane(const ImageBuffer& plane, const ClaheConfig& cfg) {
  const ClaheTables tables = clahe_tables(plane, cfg);
  const auto xs = partition(plane.width(), cfg.tiles_x);
  const auto ys = partition(plane.height(), cfg.tiles_y);
  const auto xt = axis_taps(plane.width(), xs);
  const auto yt = axis_taps(plane.height(), ys);

  ImageBuffer out(plane.width(), plane.height(), 1);
  for (int y = 0; y < plane.height(); ++y) {
    const AxisTap& ty = yt[y];
    const auto* row_lo = &tables.luts[static_cast<std::size_t>(ty.lo) * cfg.tiles_x];
    const auto* row_hi = &tables.luts[static_cast<std::size_t>(ty.hi) * cfg.tiles_x];
    for (int x = 0; x < plane.width(); ++x) {
      const AxisTap& tx = xt[x];
      const int v = plane.at(x, y);
      const double top = (1.0 - tx.w) * row_lo[tx.lo][v] + tx.w * row_lo[tx.hi][v];
      const double bot = (1.0 - tx.w) * row_hi[tx.lo][v] + tx.w * row_hi[tx.hi][v];
      const double mixed = (1.0 - ty.w) * top + ty.w * bot;
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::floor(mixed + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace

void validate(const ClaheConfig& cfg) {
  if (cfg.tiles_x < 1 || cfg.tiles_y < 1) throw std::invalid_argument("CLAHE tile grid must be at least 1x1");
  if (!(cfg.clip_limit > 0.0)) throw std::invalid_argument("CLAHE clip limit must be positive");
  if (cfg.bins < 2 || cfg.bins > 256) throw std::invalid_argument("CLAHE bins must be in 2..256");
}

ClaheTables clahe_tables(const ImageBuffer& plane, const ClaheConfig& cfg) {
  validate(cfg);
  if (plane.channels() != 1) throw std::invalid_argument("clahe_tables expects a single-channel plane");
  if (plane.width() < cfg.tiles_x || plane.height() < cfg.tiles_y) {
    throw std::invalid_argument("image " + std::to_string(plane.width()) + "x" +
                                std::to_string(plane.height()) + " is smaller than the " +
                                std::to_string(cfg.tiles_x) + "x" + std::to_string(cfg.tiles_y) +
                                " tile grid");
  }
  const auto xs = partition(plane.width(), cfg.tiles_x);
  const auto ys = partition(plane.height(), cfg.tiles_y);
  ClaheTables t{cfg.tiles_x, cfg.tiles_y, {}};
  t.luts.reserve(static_cast<std::size_t>(cfg.tiles_x) * cfg.tiles_y);
  for (int ty = 0; ty < cfg.tiles_y; ++ty) {
    for (int tx = 0; tx < cfg.tiles_x; ++tx) t.luts.push_back(tile_lut(plane, xs[tx], ys[ty], cfg));
  }
  return t;
}

ImageBuffer clahe(const ImageBuffer& img, const ClaheConfig& cfg) {
  validate(cfg);
  if (img.channels() == 1) return clahe_plane(img, cfg);
  return luma_transform(img, [&](const ImageBuffer& y) { return clahe_plane(y, cfg); });
}

}  // namespace pipeseg
