#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pipeseg/dataset.hpp"
#include "pipeseg/detection.hpp"
#include "pipeseg/enhance.hpp"
#include "pipeseg/metrics.hpp"
#include "pipeseg/report.hpp"

namespace pipeseg {

struct RunConfig {
  std::filesystem::path manifest_path;
  std::filesystem::path predictions_dir;
  EnhanceMode enhancement_mode = EnhanceMode::original;
  EnhanceConfig enhance;
  double confidence_threshold = 0.5;
  double curve_step = 0.001;
  double iou_threshold = 0.5;
  /// Empty: nothing is written.
  std::filesystem::path output_dir;
  int workers = 1;
  int class_id = 0;
  std::string model;  // defaults to the predictions directory name
  std::string label;  // defaults to model, or "model+enhancement"
};

/// Throws std::invalid_argument for out-of-range parameters.
void validate(const RunConfig& cfg);

struct EvaluationOutput {
  RunResult result;
  std::vector<SemanticMetricsRecord> records;  // image_id order
  ConfidenceCurve curve;
};

inline constexpr const char* kRecordsFileName = "records.jsonl";
inline constexpr const char* kCurveFileName = "curve.csv";
inline constexpr const char* kResultFileName = "result.json";

/// Scores every test-split image against predictions_dir/<image_id>.json.
/// With a non-original mode the enhanced inputs are archived as output_dir/enhanced/<image_id>.png.
/// Writes records.jsonl, curve.csv and result.json into output_dir.
/// Throws DataError for a missing prediction file and DimensionMismatch for a prediction canvas
/// that differs from its image, both naming the image.
EvaluationOutput run_evaluate(const RunConfig& cfg);

/// Confidence sweep only; writes curve.csv when output_dir is set.
ConfidenceCurve run_curves(const RunConfig& cfg);

/// Enhances every manifest entry (or one split) into out_dir/<image_id>.png. Returns the count.
std::size_t run_enhance(const std::filesystem::path& manifest_path, EnhanceMode mode,
                        const EnhanceConfig& cfg, const std::filesystem::path& out_dir,
                        int workers = 1, Split only = Split::unassigned);

}  // namespace pipeseg
