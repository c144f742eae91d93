#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pipeseg/labels.hpp"
#include "pipeseg/mask.hpp"

namespace pipeseg {

enum class Split { unassigned, train, val, test };

std::string_view to_string(Split s) noexcept;

struct ManifestEntry {
  int index = 0;
  std::string image_path;  // relative to the manifest directory
  std::string label_path;  // .txt polygon label or .png binary mask
  int width = 0;
  int height = 0;
  Split split = Split::unassigned;

  /// File stem of the image, e.g. "000042"; also the prediction file stem.
  std::string image_id() const;
  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::string source_root;
  std::string created_at;
  /// Directory the relative entry paths resolve against. Not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const std::string& relative) const { return base_dir / relative; }
  std::vector<const ManifestEntry*> in_split(Split s) const;
};

inline constexpr const char* kManifestFileName = "manifest.json";

std::string manifest_to_json(const DatasetManifest& m);
/// Throws DataError for schema violations.
DatasetManifest manifest_from_json(const std::string& text, std::filesystem::path base_dir);
void write_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

struct IngestOptions {
  int jpeg_quality = 95;
  int workers = 1;
  /// Fixed timestamp, mainly for reproducible tests; empty means now (UTC, ISO 8601).
  std::string created_at;
};

struct IngestReport {
  std::vector<std::string> missing_label;                         // source image names
  std::vector<std::pair<std::string, std::string>> undecodable;   // name, reason
  std::size_t ingested = 0;
};

struct IngestResult {
  DatasetManifest manifest;
  IngestReport report;
};

/// Converts every labelled image in `src_dir` to out_dir/images/NNNNNN.jpg (lexicographic
/// order of the source names), copies labels to out_dir/labels/NNNNNN.{txt,png} and writes
/// out_dir/manifest.json with no split assigned.
///
/// Source layouts: either images/ and labels/ subdirectories, or a flat directory where an
/// image `a.png` is labelled by `a.txt` or `a_mask.png`. JPEG sources are copied byte for byte.
IngestResult ingest(const std::filesystem::path& src_dir, const std::filesystem::path& out_dir,
                    const IngestOptions& opts = {});

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

/// floor(0.6 n) / floor(0.2 n) / remainder. Throws DataError for n < 3.
SplitSizes split_sizes(std::size_t n);

/// Sequential split in index order, no shuffling. Throws DataError if any entry already has a split.
DatasetManifest split_manifest(const DatasetManifest& m);

struct ValidationFinding {
  int index = -1;        // manifest entry, -1 for manifest-level findings
  std::string path;
  std::size_t line = 0;  // label line, 0 when not applicable
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationFinding> findings;
  bool ok() const noexcept { return findings.empty(); }
};

ValidationReport validate_manifest(const DatasetManifest& m);
std::string validation_report_to_json(const ValidationReport& r);

/// Ground truth for one entry and class: the semantic mask and the per-instance masks.
/// A PNG mask label counts as a single instance when it has any foreground.
struct GroundTruth {
  BinaryMask semantic;
  std::vector<BinaryMask> instances;
};

GroundTruth load_ground_truth(const DatasetManifest& m, const ManifestEntry& e, int class_id = 0);

}  // namespace pipeseg
