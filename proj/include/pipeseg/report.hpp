#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pipeseg/detection.hpp"
#include "pipeseg/metrics.hpp"

namespace pipeseg {

/// One row of a comparison table: a model evaluated under one enhancement.
struct RunResult {
  std::string label;
  std::string model;
  std::string enhancement;  // display name, e.g. "Original", "CLAHE"
  double confidence_threshold = 0.5;
  DatasetMetrics dataset_metrics;
  APResult ap;
  CurvePoint best_f1;
  friend bool operator==(const RunResult&, const RunResult&) = default;
};

std::string run_result_to_json(const RunResult& r);
/// Throws DataError for malformed documents.
RunResult run_result_from_json(std::string_view text);
RunResult read_run_result(const std::filesystem::path& path);

/// {image_id, dice, iou, hd, mad, pred_pixels, gt_pixels, intersection_pixels}, one line each.
std::string record_to_json_line(const SemanticMetricsRecord& r);
SemanticMetricsRecord record_from_json_line(std::string_view line);
std::string records_to_jsonl(std::span<const SemanticMetricsRecord> records);

/// "threshold,precision,recall,f1" header plus one row per threshold.
std::string curve_to_csv(const ConfidenceCurve& curve);

enum class TableStyle { table2, table3 };
TableStyle parse_table_style(std::string_view name);

struct RenderedTable {
  std::string markdown;
  std::string csv;
  std::string latex;
};

/// Columns Model[, Enhancement], mIoU, Dice, HD, MAD; ratios to 4 decimals, distances to 2.
/// With sort_by_label the rows are stably ordered by label.
RenderedTable render_table(std::span<const RunResult> results, TableStyle style, bool sort_by_label = false);

/// printf("%.*f") formatting.
std::string format_fixed(double value, int decimals);

}  // namespace pipeseg
