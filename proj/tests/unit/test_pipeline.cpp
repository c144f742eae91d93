#include <doctest.h>

#include <cmath>

#include "pipeseg/codec.hpp"
#include "pipeseg/errors.hpp"
#include "pipeseg/pipeline.hpp"
#include "pipeseg/predictions.hpp"
#include "support/synthetic.hpp"

using namespace pipeseg;
using pipeseg::testing::TempDir;
namespace fs = std::filesystem;

namespace {

testing::SyntheticDataset small_dataset(const fs::path& root, int count = 12, std::uint32_t seed = 5) {
  testing::SyntheticOptions opts;
  opts.count = count;
  opts.width = 48;
  opts.height = 40;
  opts.seed = seed;
  return testing::make_synthetic_dataset(root, opts);
}

RunConfig config_for(const testing::SyntheticDataset& ds, const fs::path& preds, const fs::path& out) {
  RunConfig cfg;
  cfg.manifest_path = ds.manifest_path;
  cfg.predictions_dir = preds;
  cfg.output_dir = out;
  cfg.curve_step = 0.01;
  return cfg;
}

BinaryMask rect_mask(int w, int h, int x0, int y0, int x1, int y1) {
  BinaryMask m(w, h);
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) m.set(x, y);
  return m;
}

}  // namespace

TEST_CASE("perfect predictions") {
  TempDir dir;
  const auto ds = small_dataset(dir / "ds");
  testing::write_perfect_predictions(ds, dir / "preds");
  const EvaluationOutput out = run_evaluate(config_for(ds, dir / "preds", dir / "out"));
  const DatasetMetrics& m = out.result.dataset_metrics;
  CHECK(m.miou == 1.0);
  CHECK(m.dice == 1.0);
  CHECK(m.hd_mean == 0.0);
  CHECK(m.mad_mean == 0.0);
  CHECK(out.result.ap.ap50_95 == 1.0);
  CHECK(out.result.best_f1.f1 == 1.0);
  CHECK(out.result.best_f1.threshold == 0.0);
  CHECK(out.records.size() == 12);
  CHECK(fs::exists(dir / "out" / kRecordsFileName));
  CHECK(fs::exists(dir / "out" / kCurveFileName));
  CHECK(read_run_result(dir / "out" / kResultFileName) == out.result);
  CHECK(out.result.model == "preds");
  CHECK(out.result.enhancement == "Original");
}

TEST_CASE("empty predictions everywhere") {
  TempDir dir;
  const auto ds = small_dataset(dir / "ds");
  testing::write_empty_predictions(ds, dir / "preds");
  const EvaluationOutput out = run_evaluate(config_for(ds, dir / "preds", {}));
  const double diag = std::hypot(48.0, 40.0);
  for (const auto& r : out.records) {
    if (r.gt_pixels == 0) continue;
    CHECK(r.dice == 0.0);
    CHECK(r.iou == 0.0);
    CHECK(r.hd == diag);
    CHECK(r.mad == diag);
  }
  CHECK(out.result.dataset_metrics.dice == 0.0);
  CHECK(out.result.ap.ap50_95 == 0.0);
  CHECK(out.result.ap.ap50 == 0.0);
}

TEST_CASE("controlled 3/7 IoU masks give hand-summed micro metrics") {
  TempDir dir;
  testing::SyntheticOptions opts;
  opts.count = 20;
  opts.width = 16;
  opts.height = 16;
  const auto ds = testing::make_synthetic_dataset(dir / "ds", opts);
  // Replace every label with a 2x2 box and predict a 3x2 box sharing 3 pixels: each image has
  // |G| = 4, |P| = 6, |P n G| = 3.
  fs::create_directories(dir / "preds");
  for (const auto& e : ds.manifest.entries) {
    testing::write_file(dir / "ds" / e.label_path, "0 0.25 0.25 0.375 0.25 0.375 0.375 0.25 0.375\n");
    // GT is [4,6)x[4,6); the prediction is [5,8)x[4,6) plus (4,4) minus (7,5).
    BinaryMask p = rect_mask(16, 16, 5, 4, 8, 6);
    p.set(4, 4);
    p.set(7, 5, false);
    PredictionFile f;
    f.image = fs::path(e.image_path).filename().string();
    f.width = 16;
    f.height = 16;
    f.instances.push_back({e.image_id(), 0, 0.9, RleGeometry{encode_rle(p)}});
    testing::write_file(dir / "preds" / (e.image_id() + ".json"), prediction_to_json(f));
  }
  const EvaluationOutput out = run_evaluate(config_for(ds, dir / "preds", {}));
  for (const auto& r : out.records) {
    REQUIRE(r.gt_pixels == 4);
    REQUIRE(r.pred_pixels == 6);
    REQUIRE(r.intersection_pixels == 3);
  }
  CHECK(out.result.dataset_metrics.dice == 2.0 * 60 / (120 + 80));
  CHECK(out.result.dataset_metrics.miou == 60.0 / (120 + 80 - 60));
  CHECK(out.result.dataset_metrics.image_count == 20);
}

TEST_CASE("predictions below the threshold are left out of the semantic mask") {
  TempDir dir;
  const auto ds = small_dataset(dir / "ds", 6, 9);
  testing::write_perfect_predictions(ds, dir / "preds", 0.3);
  RunConfig cfg = config_for(ds, dir / "preds", {});
  cfg.confidence_threshold = 0.5;
  const EvaluationOutput out = run_evaluate(cfg);
  for (const auto& r : out.records) CHECK(r.pred_pixels == 0);
  // Curves and AP still see every instance.
  CHECK(out.result.ap.ap50_95 == 1.0);
  CHECK(out.result.best_f1.f1 == 1.0);
  CHECK(out.result.best_f1.threshold == 0.0);
}

TEST_CASE("missing and mismatched prediction files are named") {
  TempDir dir;
  const auto ds = small_dataset(dir / "ds", 4);
  testing::write_perfect_predictions(ds, dir / "preds");
  fs::remove(dir / "preds" / "000002.json");
  try {
    run_evaluate(config_for(ds, dir / "preds", {}));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("000002") != std::string::npos);
  }

  PredictionFile f;
  f.image = "000002.jpg";
  f.width = 47;
  f.height = 40;
  testing::write_file(dir / "preds" / "000002.json", prediction_to_json(f));
  try {
    run_evaluate(config_for(ds, dir / "preds", {}));
    FAIL("expected DimensionMismatch");
  } catch (const DimensionMismatch& e) {
    CHECK(std::string(e.what()).find("000002") != std::string::npos);
  }
}

TEST_CASE("evaluation is deterministic across runs and worker counts") {
  TempDir dir;
  const auto ds = small_dataset(dir / "ds", 16, 21);
  testing::write_perfect_predictions(ds, dir / "preds", 0.7);
  // Perturb some predictions so outputs are not trivial.
  for (const auto* e : ds.manifest.in_split(Split::test)) {
    if (e->index % 3) continue;
    PredictionFile f = load_prediction_file(dir / "preds" / (e->image_id() + ".json"));
    f.instances.push_back({e->image_id(), 0, 0.61, PolygonContour{{{2, 2}, {20, 3}, {11, 25}}}});
    testing::write_file(dir / "preds" / (e->image_id() + ".json"), prediction_to_json(f));
  }
  std::string ref_records, ref_result, ref_curve;
  for (int run = 0; run < 3; ++run) {
    RunConfig cfg = config_for(ds, dir / "preds", dir / ("out" + std::to_string(run)));
    cfg.workers = run == 2 ? 8 : 1;
    run_evaluate(cfg);
    const auto records = testing::read_file(cfg.output_dir / kRecordsFileName);
    const auto result = testing::read_file(cfg.output_dir / kResultFileName);
    const auto curve = testing::read_file(cfg.output_dir / kCurveFileName);
    if (run == 0) {
      ref_records = records;
      ref_result = result;
      ref_curve = curve;
    } else {
      CHECK(records == ref_records);
      CHECK(result == ref_result);
      CHECK(curve == ref_curve);
    }
  }
}

TEST_CASE("enhanced inputs are archived and masks stay untouched") {
  TempDir dir;
  const auto ds = small_dataset(dir / "ds", 5);
  testing::write_perfect_predictions(ds, dir / "preds");
  RunConfig cfg = config_for(ds, dir / "preds", dir / "out");
  cfg.enhancement_mode = EnhanceMode::clahe;
  cfg.model = "YOLOv8n";
  const EvaluationOutput out = run_evaluate(cfg);
  CHECK(out.result.label == "YOLOv8n+CLAHE");
  CHECK(out.result.enhancement == "CLAHE");
  CHECK(out.result.dataset_metrics.dice == 1.0);
  for (const auto& e : ds.manifest.entries) {
    const ImageBuffer archived = load_image(dir / "out" / "enhanced" / (e.image_id() + ".png"));
    CHECK(archived == enhance(load_image(dir / "ds" / e.image_path), EnhanceMode::clahe));
  }
}

TEST_CASE("curves: subsample property and best point") {
  TempDir dir;
  const auto ds = small_dataset(dir / "ds", 10, 2);
  testing::write_perfect_predictions(ds, dir / "preds", 0.8);
  RunConfig cfg = config_for(ds, dir / "preds", {});
  cfg.curve_step = 0.001;
  const ConfidenceCurve fine = run_curves(cfg);
  cfg.curve_step = 0.01;
  const ConfidenceCurve coarse = run_curves(cfg);
  for (std::size_t i = 0; i < coarse.points.size(); ++i) CHECK(coarse.points[i] == fine.points[10 * i]);
  CHECK(fine.best.f1 == 1.0);
  CHECK(fine.best.threshold == 0.0);
}

TEST_CASE("configuration checks") {
  RunConfig cfg;
  cfg.confidence_threshold = 1.5;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = {};
  cfg.curve_step = 0.0;
  CHECK_THROWS_AS(validate(cfg), std::invalid_argument);
  cfg = {};
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("a manifest without test entries is a data error") {
  TempDir dir;
  testing::SyntheticOptions opts;
  opts.count = 3;
  opts.width = 8;
  opts.height = 8;
  opts.split = Split::train;
  const auto ds = testing::make_synthetic_dataset(dir / "ds", opts);
  CHECK_THROWS_AS(run_evaluate(config_for(ds, dir / "preds", {})), DataError);
}

TEST_CASE("run_enhance writes one PNG per selected entry") {
  TempDir dir;
  const auto ds = small_dataset(dir / "ds", 4);
  CHECK(run_enhance(ds.manifest_path, EnhanceMode::clahe_gamma, {}, dir / "enh", 2) == 4);
  for (const auto& e : ds.manifest.entries) CHECK(fs::exists(dir / "enh" / (e.image_id() + ".png")));
}
