#include "pipeseg/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pipeseg/errors.hpp"
#include "pipeseg/metrics.hpp"

namespace pipeseg {

namespace {

std::vector<std::size_t> confidence_order(std::span<const double> confidences) {
  std::vector<std::size_t> order(confidences.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return confidences[a] > confidences[b];
  });
  return order;
}

std::size_t total_gt(std::span<const ScoredImage> images) {
  std::size_t n = 0;
  for (const auto& im : images) n += im.gt_count;
  return n;
}

// A prediction's confidence and whether it matched, pooled across images.
struct RankedPrediction {
  double confidence;
  const std::string* image_id;
  std::size_t index;
  bool tp;
};

std::vector<RankedPrediction> ranked_predictions(std::span<const ScoredImage> images,
                                                 double iou_thr) {
  std::vector<RankedPrediction> out;
  for (const auto& im : images) {
    const MatchResult m = greedy_match(im.confidences, im.ious, iou_thr);
    for (std::size_t i = 0; i < im.confidences.size(); ++i) {
      out.push_back({im.confidences[i], &im.image_id, i, m.pred_to_gt[i] >= 0});
    }
  }
  std::sort(out.begin(), out.end(), [](const RankedPrediction& a, const RankedPrediction& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (*a.image_id != *b.image_id) return *a.image_id < *b.image_id;
    return a.index < b.index;
  });
  return out;
}

}  // namespace

BinaryMask rasterize_instance(const PredictionInstance& inst, int width, int height) {
  return std::visit(
      [&](const auto& g) -> BinaryMask {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, PolygonContour>) {
          return rasterize_polygon(g, width, height);
        } else {
          return decode_rle(g.counts, width, height);
        }
      },
      inst.geometry);
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  const OverlapCounts c = overlap_counts(a, b);
  return c.pred + c.gt - c.intersection == 0 ? 0.0 : iou_from_counts(c);
}

IouTable iou_table(std::span<const BinaryMask> preds, std::span<const BinaryMask> gts) {
  IouTable t{preds.size(), gts.size(), std::vector<double>(preds.size() * gts.size())};
  for (std::size_t p = 0; p < preds.size(); ++p) {
    for (std::size_t g = 0; g < gts.size(); ++g) t.values[p * gts.size() + g] = mask_iou(preds[p], gts[g]);
  }
  return t;
}

MatchResult greedy_match(std::span<const double> confidences, const IouTable& ious, double iou_thr) {
  if (confidences.size() != ious.preds) {
    throw std::invalid_argument("greedy_match: confidence count differs from IoU table rows");
  }
  MatchResult r;
  r.order = confidence_order(confidences);
  r.pred_to_gt.assign(confidences.size(), -1);
  r.gt_matched.assign(ious.gts, false);
  for (std::size_t p : r.order) {
    int best = -1;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < ious.gts; ++g) {
      if (r.gt_matched[g]) continue;
      const double v = ious.at(p, g);
      if (v >= iou_thr && v > best_iou) {
        best = static_cast<int>(g);
        best_iou = v;
      }
    }
    if (best >= 0) {
      r.pred_to_gt[p] = best;
      r.gt_matched[static_cast<std::size_t>(best)] = true;
      ++r.true_positives;
    } else {
      ++r.false_positives;
    }
  }
  r.false_negatives = ious.gts - r.true_positives;
  return r;
}

MatchResult match_instances(std::span<const PredictionInstance> preds,
                            std::span<const BinaryMask> gts, double iou_thr) {
  std::vector<double> conf;
  std::vector<BinaryMask> masks;
  conf.reserve(preds.size());
  for (const auto& p : preds) conf.push_back(p.confidence);
  if (!gts.empty()) {
    for (const auto& p : preds) masks.push_back(rasterize_instance(p, gts[0].width(), gts[0].height()));
  } else {
    masks.resize(preds.size());
  }
  IouTable t = gts.empty() ? IouTable{preds.size(), 0, {}} : iou_table(masks, gts);
  return greedy_match(conf, t, iou_thr);
}

ScoredImage score_image(std::string image_id, std::span<const double> confidences,
                        std::span<const BinaryMask> pred_masks, std::span<const BinaryMask> gt_masks) {
  if (confidences.size() != pred_masks.size()) {
    throw std::invalid_argument("score_image: one confidence per prediction mask required");
  }
  ScoredImage s;
  s.image_id = std::move(image_id);
  s.confidences.assign(confidences.begin(), confidences.end());
  s.gt_count = gt_masks.size();
  s.ious = iou_table(pred_masks, gt_masks);
  return s;
}

double f1_score(double precision, double recall) noexcept {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

CurvePoint curve_point(double threshold, std::size_t tp, std::size_t fp, std::size_t fn) noexcept {
  CurvePoint c;
  c.threshold = threshold;
  c.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  c.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  c.f1 = f1_score(c.precision, c.recall);
  return c;
}

std::vector<double> threshold_grid(double step) {
  if (!(step > 0.0 && step <= 0.5)) throw std::invalid_argument("curve step must be in (0, 0.5]");
  std::vector<double> grid;
  const double inv = 1.0 / step;
  const long long n = std::llround(inv);
  if (std::abs(inv - static_cast<double>(n)) < 1e-9 * inv) {
    for (long long i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) / static_cast<double>(n));
  } else {
    for (long long i = 0; static_cast<double>(i) * step < 1.0; ++i) grid.push_back(static_cast<double>(i) * step);
    grid.push_back(1.0);
  }
  return grid;
}

ConfidenceCurve confidence_curve(std::span<const ScoredImage> images, double iou_thr, double step) {
  const auto grid = threshold_grid(step);
  const std::size_t n_gt = total_gt(images);
  if (n_gt == 0) throw DataError("confidence curve needs at least one ground-truth instance");

  // Greedy matching of a confidence prefix never depends on the predictions after it, so one
  // matching pass per image gives TP/FP for every threshold.
  const auto ranked = ranked_predictions(images, iou_thr);
  std::vector<std::size_t> tp_prefix(ranked.size() + 1, 0);
  for (std::size_t i = 0; i < ranked.size(); ++i) tp_prefix[i + 1] = tp_prefix[i] + ranked[i].tp;

  ConfidenceCurve curve;
  curve.points.reserve(grid.size());
  for (double t : grid) {
    // ranked is confidence-descending: count of entries with confidence >= t.
    const auto it = std::partition_point(ranked.begin(), ranked.end(),
                                         [t](const RankedPrediction& r) { return r.confidence >= t; });
    const auto kept = static_cast<std::size_t>(it - ranked.begin());
    const std::size_t tp = tp_prefix[kept];
    curve.points.push_back(curve_point(t, tp, kept - tp, n_gt - tp));
  }
  curve.best = curve.points.front();
  for (const auto& p : curve.points) {
    if (p.f1 > curve.best.f1) curve.best = p;
  }
  return curve;
}

double average_precision(std::span<const ScoredImage> images, double iou_thr) {
  const std::size_t n_gt = total_gt(images);
  if (n_gt == 0) throw DataError("average precision needs at least one ground-truth instance");
  const auto ranked = ranked_predictions(images, iou_thr);
  if (ranked.empty()) return 0.0;

  std::vector<double> precision(ranked.size());
  std::vector<std::size_t> tp_cum(ranked.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    tp += ranked[i].tp;
    tp_cum[i] = tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Monotone envelope from the right.
  for (std::size_t i = ranked.size() - 1; i > 0; --i) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }

  double sum = 0.0;
  std::size_t k = 0;
  for (std::size_t step = 0; step <= 100; ++step) {
    // First rank whose recall tp_cum/n_gt reaches step/100, compared in integers.
    while (k < ranked.size() && tp_cum[k] * 100 < step * n_gt) ++k;
    if (k == ranked.size()) break;
    sum += precision[k];
  }
  return sum / 101.0;
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int k = 0; k < 10; ++k) t.push_back(static_cast<double>(50 + 5 * k) / 100.0);
  return t;
}

APResult map_range(std::span<const ScoredImage> images) {
  APResult r;
  double sum = 0.0;
  for (double thr : coco_iou_thresholds()) {
    const double ap = average_precision(images, thr);
    r.per_threshold.emplace_back(thr, ap);
    sum += ap;
  }
  r.ap50 = r.per_threshold.front().second;
  r.ap50_95 = sum / static_cast<double>(r.per_threshold.size());
  return r;
}

BinaryMask semantic_mask_at_threshold(std::span<const PredictionInstance> instances, double t,
                                      int width, int height) {
  BinaryMask out(width, height);
  for (const auto& inst : instances) {
    if (inst.confidence < t) continue;
    const BinaryMask m = rasterize_instance(inst, width, height);
    auto dst = out.bits();
    auto src = m.bits();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  }
  return out;
}

}  // namespace pipeseg
