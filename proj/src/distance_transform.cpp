#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pipeseg/mask.hpp"

namespace pipeseg {

namespace {

constexpr std::int64_t kUnreached = std::numeric_limits<std::int64_t>::max() / 4;

// Lower envelope of parabolas (q - v)^2 + f[v] over the finite entries of f.
// Writes min_v ((q - v)^2 + f[v]) for every q into out; f must contain a finite entry.
void envelope_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out,
                 std::vector<int>& sites, std::vector<double>& bounds) {
  const int n = static_cast<int>(f.size());
  // bounds[i] separates sites[i] from sites[i + 1].
  sites.clear();
  bounds.clear();
  auto intersect = [&](int p, int q) {
    // Where parabola rooted at q overtakes the one rooted at p (p < q).
    return (static_cast<double>(f[q] + std::int64_t{q} * q) -
            static_cast<double>(f[p] + std::int64_t{p} * p)) /
           (2.0 * (q - p));
  };
  for (int q = 0; q < n; ++q) {
    if (f[q] >= kUnreached) continue;
    while (!sites.empty()) {
      const double s = intersect(sites.back(), q);
      if (sites.size() > 1 && s <= bounds.back()) {
        sites.pop_back();
        bounds.pop_back();
      } else {
        bounds.push_back(s);
        break;
      }
    }
    sites.push_back(q);
  }
  std::size_t k = 0;
  for (int q = 0; q < n; ++q) {
    while (k < bounds.size() && bounds[k] < q) ++k;
    const int v = sites[k];
    const std::int64_t d = q - v;
    out[q] = d * d + f[v];
  }
}

}  // namespace

std::vector<std::int64_t> squared_distance_transform(const BinaryMask& seeds) {
  const int w = seeds.width(), h = seeds.height();
  if (w < 1 || h < 1 || seeds.empty()) {
    throw std::invalid_argument("distance_transform needs at least one seed");
  }

  // Column pass: squared vertical distance to the nearest seed in the same column.
  std::vector<std::int64_t> grid(static_cast<std::size_t>(w) * h, kUnreached);
  for (int x = 0; x < w; ++x) {
    std::int64_t last = -1;
    for (int y = 0; y < h; ++y) {
      if (seeds.at(x, y)) last = y;
      if (last >= 0) {
        const std::int64_t d = y - last;
        grid[static_cast<std::size_t>(y) * w + x] = d * d;
      }
    }
    last = -1;
    for (int y = h - 1; y >= 0; --y) {
      if (seeds.at(x, y)) last = y;
      if (last >= 0) {
        const std::int64_t d = last - y;
        auto& cell = grid[static_cast<std::size_t>(y) * w + x];
        cell = std::min(cell, d * d);
      }
    }
  }

  // Row pass: every row has a finite entry because some column holds a seed.
  std::vector<std::int64_t> row(w), out_row(w);
  std::vector<int> sites;
  std::vector<double> bounds;
  sites.reserve(w);
  bounds.reserve(w);
  for (int y = 0; y < h; ++y) {
    auto* base = grid.data() + static_cast<std::size_t>(y) * w;
    row.assign(base, base + w);
    envelope_1d(row, out_row, sites, bounds);
    std::copy(out_row.begin(), out_row.end(), base);
  }
  return grid;
}

DistanceField distance_transform(const BinaryMask& seeds) {
  const auto sq = squared_distance_transform(seeds);
  std::vector<double> values(sq.size());
  for (std::size_t i = 0; i < sq.size(); ++i) values[i] = std::sqrt(static_cast<double>(sq[i]));
  return DistanceField(seeds.width(), seeds.height(), std::move(values));
}

DistanceField distance_transform(std::span<const PixelPoint> seeds, int width, int height) {
  if (seeds.empty()) throw std::invalid_argument("distance_transform needs at least one seed");
  BinaryMask m(width, height);
  for (const auto& p : seeds) {
    if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
      throw std::invalid_argument("seed point outside the canvas");
    }
    m.set(p.x, p.y);
  }
  return distance_transform(m);
}

DistanceField distance_transform(const BoundarySet& seeds) {
  return distance_transform(seeds.points, seeds.width, seeds.height);
}

}  // namespace pipeseg
