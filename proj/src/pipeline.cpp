#include "pipeseg/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "pipeseg/codec.hpp"
#include "pipeseg/errors.hpp"
#include "pipeseg/parallel.hpp"
#include "pipeseg/predictions.hpp"

namespace pipeseg {

namespace {

struct ImageOutcome {
  SemanticMetricsRecord record;
  ScoredImage scored;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  if (!out) throw DataError("cannot write " + path.string());
}

std::vector<const ManifestEntry*> test_entries(const DatasetManifest& m) {
  auto entries = m.in_split(Split::test);
  if (entries.empty()) throw DataError("manifest has no test-split entries");
  return entries;
}

ImageOutcome evaluate_entry(const RunConfig& cfg, const DatasetManifest& m, const ManifestEntry& e) {
  const std::string id = e.image_id();
  const auto pred_path = cfg.predictions_dir / (id + ".json");
  if (!std::filesystem::exists(pred_path)) {
    throw DataError("missing prediction file for image " + id + ": " + pred_path.string());
  }
  const PredictionFile pred = load_prediction_file(pred_path);
  if (pred.width != e.width || pred.height != e.height) {
    throw DimensionMismatch("image " + id + ": prediction canvas " + std::to_string(pred.width) + "x" +
                            std::to_string(pred.height) + " differs from image " + std::to_string(e.width) +
                            "x" + std::to_string(e.height));
  }

  if (cfg.enhancement_mode != EnhanceMode::original && !cfg.output_dir.empty()) {
    const ImageBuffer enhanced = enhance(load_image(m.resolve(e.image_path)), cfg.enhancement_mode, cfg.enhance);
    save_image(enhanced, cfg.output_dir / "enhanced" / (id + ".png"));
  }

  GroundTruth gt = load_ground_truth(m, e, cfg.class_id);

  std::vector<double> confidences;
  std::vector<BinaryMask> masks;
  BinaryMask semantic(e.width, e.height);
  for (const auto& inst : pred.instances) {
    if (inst.class_id != cfg.class_id) continue;
    BinaryMask mask = rasterize_instance(inst, e.width, e.height);
    if (inst.confidence >= cfg.confidence_threshold) {
      auto dst = semantic.bits();
      auto src = mask.bits();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
    }
    confidences.push_back(inst.confidence);
    masks.push_back(std::move(mask));
  }

  ImageOutcome out;
  out.record = evaluate_pair(semantic, gt.semantic, id);
  out.scored = score_image(id, confidences, masks, gt.instances);
  return out;
}

std::vector<ImageOutcome> evaluate_all(const RunConfig& cfg, bool with_semantic) {
  validate(cfg);
  const DatasetManifest m = read_manifest(cfg.manifest_path);
  const auto entries = test_entries(m);
  RunConfig local = cfg;
  if (!with_semantic) local.enhancement_mode = EnhanceMode::original;
  if (local.enhancement_mode != EnhanceMode::original && !local.output_dir.empty()) {
    std::filesystem::create_directories(local.output_dir / "enhanced");
  }
  std::vector<ImageOutcome> outcomes(entries.size());
  parallel_for(entries.size(), cfg.workers,
               [&](std::size_t i) { outcomes[i] = evaluate_entry(local, m, *entries[i]); });
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const ImageOutcome& a, const ImageOutcome& b) { return a.record.image_id < b.record.image_id; });
  return outcomes;
}

std::string default_model(const RunConfig& cfg) {
  if (!cfg.model.empty()) return cfg.model;
  auto p = cfg.predictions_dir;
  if (!p.has_filename()) p = p.parent_path();
  return p.filename().string();
}

}  // namespace

void validate(const RunConfig& cfg) {
  auto ratio = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
  if (!ratio(cfg.confidence_threshold)) throw std::invalid_argument("confidence threshold must be in [0, 1]");
  if (!ratio(cfg.iou_threshold)) throw std::invalid_argument("IoU threshold must be in [0, 1]");
  if (!(cfg.curve_step > 0.0 && cfg.curve_step <= 0.5)) throw std::invalid_argument("curve step must be in (0, 0.5]");
  if (cfg.workers < 0) throw std::invalid_argument("workers must be >= 0");
  validate(cfg.enhance.clahe);
  validate(cfg.enhance.gamma);
  validate(cfg.enhance.dehaze);
}

EvaluationOutput run_evaluate(const RunConfig& cfg) {
  const auto outcomes = evaluate_all(cfg, true);

  EvaluationOutput out;
  std::vector<ScoredImage> scored;
  for (const auto& o : outcomes) {
    out.records.push_back(o.record);
    scored.push_back(o.scored);
  }
  out.curve = confidence_curve(scored, cfg.iou_threshold, cfg.curve_step);

  RunResult& r = out.result;
  r.model = default_model(cfg);
  r.enhancement = std::string(display_name(cfg.enhancement_mode));
  r.label = !cfg.label.empty() ? cfg.label
            : cfg.enhancement_mode == EnhanceMode::original ? r.model
                                                            : r.model + "+" + r.enhancement;
  r.confidence_threshold = cfg.confidence_threshold;
  r.dataset_metrics = aggregate(out.records);
  r.ap = map_range(scored);
  r.best_f1 = out.curve.best;

  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    write_text(cfg.output_dir / kRecordsFileName, records_to_jsonl(out.records));
    write_text(cfg.output_dir / kCurveFileName, curve_to_csv(out.curve));
    write_text(cfg.output_dir / kResultFileName, run_result_to_json(r));
  }
  return out;
}

ConfidenceCurve run_curves(const RunConfig& cfg) {
  const auto outcomes = evaluate_all(cfg, false);
  std::vector<ScoredImage> scored;
  for (const auto& o : outcomes) scored.push_back(o.scored);
  ConfidenceCurve curve = confidence_curve(scored, cfg.iou_threshold, cfg.curve_step);
  if (!cfg.output_dir.empty()) {
    std::filesystem::create_directories(cfg.output_dir);
    write_text(cfg.output_dir / kCurveFileName, curve_to_csv(curve));
  }
  return curve;
}

std::size_t run_enhance(const std::filesystem::path& manifest_path, EnhanceMode mode, const EnhanceConfig& cfg,
                        const std::filesystem::path& out_dir, int workers, Split only) {
  validate(cfg.clahe);
  validate(cfg.gamma);
  validate(cfg.dehaze);
  const DatasetManifest m = read_manifest(manifest_path);
  std::vector<const ManifestEntry*> entries;
  if (only == Split::unassigned) {
    for (const auto& e : m.entries) entries.push_back(&e);
  } else {
    entries = m.in_split(only);
  }
  std::filesystem::create_directories(out_dir);
  parallel_for(entries.size(), workers, [&](std::size_t i) {
    const ManifestEntry& e = *entries[i];
    save_image(enhance(load_image(m.resolve(e.image_path)), mode, cfg), out_dir / (e.image_id() + ".png"));
  });
  return entries.size();
}

}  // namespace pipeseg
