#include "pipeseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pipeseg/errors.hpp"

namespace pipeseg {

namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (!a.same_shape(b)) {
    throw DimensionMismatch("masks differ in size: " + std::to_string(a.width()) + "x" +
                            std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                            std::to_string(b.height()));
  }
}

struct DirectedSums {
  double max_ab = 0.0;  // sup over a of distance to b
  double max_ba = 0.0;
  double sum_ab = 0.0;
  double sum_ba = 0.0;
  std::size_t count_a = 0;
  std::size_t count_b = 0;
};

// Both contours nonempty.
DirectedSums contour_distances(const BoundarySet& a, const BoundarySet& b) {
  const DistanceField to_b = distance_transform(b);
  const DistanceField to_a = distance_transform(a);
  DirectedSums s;
  for (const auto& p : a.points) {
    const double d = to_b.at(p.x, p.y);
    s.max_ab = std::max(s.max_ab, d);
    s.sum_ab += d;
  }
  for (const auto& p : b.points) {
    const double d = to_a.at(p.x, p.y);
    s.max_ba = std::max(s.max_ba, d);
    s.sum_ba += d;
  }
  s.count_a = a.points.size();
  s.count_b = b.points.size();
  return s;
}

}  // namespace

OverlapCounts overlap_counts(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt);
  OverlapCounts c;
  auto p = pred.bits();
  auto g = gt.bits();
  for (std::size_t i = 0; i < p.size(); ++i) {
    c.pred += p[i];
    c.gt += g[i];
    c.intersection += p[i] & g[i];
  }
  return c;
}

double dice_from_counts(const OverlapCounts& c) noexcept {
  const std::int64_t denom = c.pred + c.gt;
  return denom == 0 ? 1.0 : 2.0 * static_cast<double>(c.intersection) / static_cast<double>(denom);
}

double iou_from_counts(const OverlapCounts& c) noexcept {
  const std::int64_t uni = c.pred + c.gt - c.intersection;
  return uni == 0 ? 1.0 : static_cast<double>(c.intersection) / static_cast<double>(uni);
}

double empty_contour_penalty(int width, int height) noexcept {
  return std::hypot(static_cast<double>(width), static_cast<double>(height));
}

double dice(const BinaryMask& pred, const BinaryMask& gt) {
  return dice_from_counts(overlap_counts(pred, gt));
}

double iou(const BinaryMask& pred, const BinaryMask& gt) {
  return iou_from_counts(overlap_counts(pred, gt));
}

double hausdorff(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt);
  const BoundarySet bp = extract_boundary(pred);
  const BoundarySet bg = extract_boundary(gt);
  if (bp.empty() && bg.empty()) return 0.0;
  if (bp.empty() || bg.empty()) return empty_contour_penalty(pred.width(), pred.height());
  const auto s = contour_distances(bg, bp);
  return std::max(s.max_ab, s.max_ba);
}

double mad(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt);
  const BoundarySet bp = extract_boundary(pred);
  const BoundarySet bg = extract_boundary(gt);
  if (bp.empty() && bg.empty()) return 0.0;
  if (bp.empty() || bg.empty()) return empty_contour_penalty(pred.width(), pred.height());
  const auto s = contour_distances(bg, bp);
  return (s.sum_ab + s.sum_ba) / static_cast<double>(s.count_a + s.count_b);
}

SemanticMetricsRecord evaluate_pair(const BinaryMask& pred, const BinaryMask& gt,
                                    std::string image_id) {
  const OverlapCounts c = overlap_counts(pred, gt);
  SemanticMetricsRecord r;
  r.image_id = std::move(image_id);
  r.dice = dice_from_counts(c);
  r.iou = iou_from_counts(c);
  r.pred_pixels = c.pred;
  r.gt_pixels = c.gt;
  r.intersection_pixels = c.intersection;

  const BoundarySet bp = extract_boundary(pred);
  const BoundarySet bg = extract_boundary(gt);
  if (bp.empty() && bg.empty()) {
    r.hd = r.mad = 0.0;
  } else if (bp.empty() || bg.empty()) {
    r.hd = r.mad = empty_contour_penalty(pred.width(), pred.height());
  } else {
    const auto s = contour_distances(bg, bp);
    r.hd = std::max(s.max_ab, s.max_ba);
    r.mad = (s.sum_ab + s.sum_ba) / static_cast<double>(s.count_a + s.count_b);
  }
  return r;
}

DatasetMetrics aggregate(std::span<const SemanticMetricsRecord> records) {
  if (records.empty()) throw std::invalid_argument("aggregate needs at least one record");

  std::vector<const SemanticMetricsRecord*> order;
  order.reserve(records.size());
  for (const auto& r : records) order.push_back(&r);
  std::stable_sort(order.begin(), order.end(),
                   [](const auto* a, const auto* b) { return a->image_id < b->image_id; });

  OverlapCounts total;
  double hd_sum = 0.0, mad_sum = 0.0;
  std::int64_t defined = 0;
  DatasetMetrics m;
  for (const auto* r : order) {
    total.pred += r->pred_pixels;
    total.gt += r->gt_pixels;
    total.intersection += r->intersection_pixels;
    if (r->both_empty()) {
      ++m.undefined_hd_count;
      continue;
    }
    hd_sum += r->hd;
    mad_sum += r->mad;
    ++defined;
  }
  m.image_count = static_cast<std::int64_t>(records.size());
  m.dice = dice_from_counts(total);
  m.miou = iou_from_counts(total);
  m.hd_mean = defined > 0 ? hd_sum / static_cast<double>(defined) : 0.0;
  m.mad_mean = defined > 0 ? mad_sum / static_cast<double>(defined) : 0.0;
  return m;
}

}  // namespace pipeseg
