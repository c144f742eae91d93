#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pipeseg/mask.hpp"

// Brute-force reference implementations, deliberately naive.
namespace pipeseg::oracle {

inline bool inside_even_odd(const PolygonContour& poly, double px, double py) {
  bool in = false;
  const auto& v = poly.vertices;
  for (std::size_t i = 0, j = v.size() - 1; i < v.size(); j = i++) {
    const bool crosses = (v[i].y > py) != (v[j].y > py);
    if (crosses) {
      const double x = v[j].x + (py - v[j].y) * (v[i].x - v[j].x) / (v[i].y - v[j].y);
      if (px < x) in = !in;
    }
  }
  return in;
}

inline BinaryMask rasterize(const PolygonContour& poly, int w, int h) {
  BinaryMask m(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m.set(x, y, inside_even_odd(poly, x + 0.5, y + 0.5));
  return m;
}

inline std::vector<PixelPoint> boundary(const BinaryMask& m) {
  std::vector<PixelPoint> out;
  auto fg = [&](int x, int y) { return x >= 0 && y >= 0 && x < m.width() && y < m.height() && m.at(x, y); };
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x)
      if (fg(x, y) && (!fg(x - 1, y) || !fg(x + 1, y) || !fg(x, y - 1) || !fg(x, y + 1))) out.push_back({x, y});
  return out;
}

inline double min_dist(const PixelPoint& p, const std::vector<PixelPoint>& set) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : set) best = std::min(best, std::hypot(double(p.x - q.x), double(p.y - q.y)));
  return best;
}

inline std::vector<double> edt(const std::vector<PixelPoint>& seeds, int w, int h) {
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out[static_cast<std::size_t>(y) * w + x] = min_dist({x, y}, seeds);
  return out;
}

inline double diagonal(const BinaryMask& m) { return std::sqrt(double(m.width()) * m.width() + double(m.height()) * m.height()); }

inline double hausdorff(const BinaryMask& a, const BinaryMask& b) {
  const auto ba = boundary(a), bb = boundary(b);
  if (ba.empty() && bb.empty()) return 0.0;
  if (ba.empty() || bb.empty()) return diagonal(a);
  double h = 0.0;
  for (const auto& p : ba) h = std::max(h, min_dist(p, bb));
  for (const auto& p : bb) h = std::max(h, min_dist(p, ba));
  return h;
}

inline double mad(const BinaryMask& a, const BinaryMask& b) {
  const auto ba = boundary(a), bb = boundary(b);
  if (ba.empty() && bb.empty()) return 0.0;
  if (ba.empty() || bb.empty()) return diagonal(a);
  double s = 0.0;
  for (const auto& p : ba) s += min_dist(p, bb);
  for (const auto& p : bb) s += min_dist(p, ba);
  return s / double(ba.size() + bb.size());
}

}  // namespace pipeseg::oracle
