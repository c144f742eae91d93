#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pipeseg/mask.hpp"

namespace pipeseg {

struct RleGeometry {
  std::vector<std::int64_t> counts;
};

/// Polygon in pixel coordinates, or run-length counts on the image canvas.
using InstanceGeometry = std::variant<PolygonContour, RleGeometry>;

struct PredictionInstance {
  std::string image_id;
  int class_id = 0;
  double confidence = 0.0;
  InstanceGeometry geometry;
};

/// Throws DataError when RLE counts do not cover exactly width*height pixels.
BinaryMask rasterize_instance(const PredictionInstance& inst, int width, int height);

/// Instance-level IoU; 0 when both masks are empty so degenerate instances never match.
double mask_iou(const BinaryMask& a, const BinaryMask& b);

struct MatchResult {
  std::vector<std::size_t> order;     // prediction indices, highest confidence first
  std::vector<int> pred_to_gt;        // per input prediction: matched GT index or -1
  std::vector<bool> gt_matched;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;
};

/// Pairwise IoUs for one image, row-major by prediction.
struct IouTable {
  std::size_t preds = 0;
  std::size_t gts = 0;
  std::vector<double> values;

  double at(std::size_t p, std::size_t g) const { return values[p * gts + g]; }
};

IouTable iou_table(std::span<const BinaryMask> preds, std::span<const BinaryMask> gts);

/// Greedy matching in confidence order (stable for ties): each prediction takes the unmatched
/// GT with the highest IoU >= iou_thr, lower GT index winning ties.
MatchResult greedy_match(std::span<const double> confidences, const IouTable& ious, double iou_thr);

/// Rasterizes every prediction onto the GT canvas, then runs greedy_match.
MatchResult match_instances(std::span<const PredictionInstance> preds,
                            std::span<const BinaryMask> gts, double iou_thr);

/// Everything the dataset-level sweeps need from one image, with masks already reduced to IoUs.
struct ScoredImage {
  std::string image_id;
  std::vector<double> confidences;
  std::size_t gt_count = 0;
  IouTable ious;
};

ScoredImage score_image(std::string image_id, std::span<const double> confidences,
                        std::span<const BinaryMask> pred_masks, std::span<const BinaryMask> gt_masks);

struct CurvePoint {
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// f1 = 2PR/(P+R), 0 when P+R == 0.
double f1_score(double precision, double recall) noexcept;

/// Precision is 0 when nothing is kept at a threshold.
CurvePoint curve_point(double threshold, std::size_t tp, std::size_t fp, std::size_t fn) noexcept;

struct ConfidenceCurve {
  std::vector<CurvePoint> points;
  CurvePoint best;  // highest F1, lowest threshold among ties
};

/// Thresholds 0, step, 2*step, ..., 1. When 1/step is an integer N the grid is i/N exactly,
/// so coarse grids are exact subsamples of finer ones.
std::vector<double> threshold_grid(double step);

/// Sweeps the confidence threshold; predictions with confidence >= t are kept.
/// Throws std::invalid_argument for step outside (0, 0.5], DataError without GT instances.
ConfidenceCurve confidence_curve(std::span<const ScoredImage> images, double iou_thr,
                                 double step = 0.001);

/// 101-point interpolated AP over the pooled, confidence-ranked predictions.
/// Ties rank by image_id, then prediction index. Throws DataError without GT instances.
double average_precision(std::span<const ScoredImage> images, double iou_thr);

struct APResult {
  double ap50 = 0.0;
  double ap50_95 = 0.0;
  std::vector<std::pair<double, double>> per_threshold;  // (iou threshold, AP)
  friend bool operator==(const APResult&, const APResult&) = default;
};

/// AP at IoU 0.50:0.05:0.95 and their mean.
APResult map_range(std::span<const ScoredImage> images);

/// IoU thresholds 0.50, 0.55, ..., 0.95.
std::vector<double> coco_iou_thresholds();

/// Union of the instances with confidence >= t.
BinaryMask semantic_mask_at_threshold(std::span<const PredictionInstance> instances, double t,
                                      int width, int height);

}  // namespace pipeseg
