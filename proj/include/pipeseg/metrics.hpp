#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pipeseg/mask.hpp"

namespace pipeseg {

/// Per-image semantic scores plus the raw counts needed for dataset-level pooling.
struct SemanticMetricsRecord {
  std::string image_id;
  double dice = 0.0;
  double iou = 0.0;
  double hd = 0.0;
  double mad = 0.0;
  std::int64_t pred_pixels = 0;
  std::int64_t gt_pixels = 0;
  std::int64_t intersection_pixels = 0;

  /// Both masks empty: distances are undefined and left out of hd/mad means.
  bool both_empty() const noexcept { return pred_pixels == 0 && gt_pixels == 0; }
  friend bool operator==(const SemanticMetricsRecord&, const SemanticMetricsRecord&) = default;
};

struct DatasetMetrics {
  double miou = 0.0;
  double dice = 0.0;
  double hd_mean = 0.0;
  double mad_mean = 0.0;
  std::int64_t image_count = 0;
  std::int64_t undefined_hd_count = 0;
  friend bool operator==(const DatasetMetrics&, const DatasetMetrics&) = default;
};

struct OverlapCounts {
  std::int64_t pred = 0;
  std::int64_t gt = 0;
  std::int64_t intersection = 0;
};

/// Pixel counts |P|, |G|, |P n G|. Throws DimensionMismatch for different canvases.
OverlapCounts overlap_counts(const BinaryMask& pred, const BinaryMask& gt);

// Empty-mask policy shared by all four metrics:
//   both empty -> dice = iou = 1, hd = mad = 0
//   one empty  -> dice = iou = 0, hd = mad = sqrt(w^2 + h^2)
double dice(const BinaryMask& pred, const BinaryMask& gt);
double iou(const BinaryMask& pred, const BinaryMask& gt);
double hausdorff(const BinaryMask& pred, const BinaryMask& gt);
double mad(const BinaryMask& pred, const BinaryMask& gt);

double dice_from_counts(const OverlapCounts& c) noexcept;
double iou_from_counts(const OverlapCounts& c) noexcept;

/// Penalty distance for a missing contour: the canvas diagonal.
double empty_contour_penalty(int width, int height) noexcept;

SemanticMetricsRecord evaluate_pair(const BinaryMask& pred, const BinaryMask& gt,
                                    std::string image_id);

/// Dice and mIoU are pooled over summed pixel counts; HD and MAD are per-image means
/// that skip both-empty images. Records are reduced in image_id order, so the result
/// does not depend on input order. Throws std::invalid_argument for an empty list.
DatasetMetrics aggregate(std::span<const SemanticMetricsRecord> records);

}  // namespace pipeseg
