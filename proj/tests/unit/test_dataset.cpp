#include <doctest.h>

#include <random>
#include <set>

#include "pipeseg/codec.hpp"
#include "pipeseg/dataset.hpp"
#include "pipeseg/errors.hpp"
#include "support/synthetic.hpp"

using namespace pipeseg;
using pipeseg::testing::TempDir;
namespace fs = std::filesystem;

namespace {

const char* kSquare = "0 0.25 0.25 0.75 0.25 0.75 0.75 0.25 0.75\n";

void put_image(const fs::path& p, int w, int h, std::uint8_t v, ImageFormat fmt = ImageFormat::png) {
  save_image(ImageBuffer(w, h, 3, std::vector<std::uint8_t>(std::size_t(w) * h * 3, v)), p, fmt);
}

}  // namespace

TEST_CASE("split arithmetic") {
  auto s = split_sizes(647);
  CHECK(s.train == 388);
  CHECK(s.val == 129);
  CHECK(s.test == 130);
  s = split_sizes(10);
  CHECK(s.train == 6);
  CHECK(s.val == 2);
  CHECK(s.test == 2);
  for (std::size_t n = 3; n < 2000; ++n) {
    const auto z = split_sizes(n);
    CHECK(z.train == n * 6 / 10);
    CHECK(z.val == n * 2 / 10);
    CHECK(z.train + z.val + z.test == n);
  }
  CHECK_THROWS_AS(split_sizes(2), DataError);
}

TEST_CASE("sequential split is a partition in index order") {
  DatasetManifest m;
  for (int i = 0; i < 647; ++i) m.entries.push_back({i, "images/x.jpg", "labels/x.txt", 4, 4, Split::unassigned});
  const DatasetManifest s = split_manifest(m);
  CHECK(s.in_split(Split::train).size() == 388);
  CHECK(s.in_split(Split::val).size() == 129);
  CHECK(s.in_split(Split::test).size() == 130);
  for (int i = 0; i < 647; ++i) {
    const Split want = i < 388 ? Split::train : i < 517 ? Split::val : Split::test;
    CHECK(s.entries[i].split == want);
  }
  CHECK_THROWS_AS(split_manifest(s), DataError);
  DatasetManifest tiny;
  tiny.entries.resize(2);
  CHECK_THROWS_AS(split_manifest(tiny), DataError);
}

TEST_CASE("ingest renames in lexicographic order and reports missing labels") {
  TempDir src, out;
  for (const char* n : {"c", "a", "b"}) {
    put_image(src / (std::string(n) + ".png"), 8, 6, 100);
    testing::write_file(src / (std::string(n) + ".txt"), kSquare);
  }
  put_image(src / "orphan.png", 8, 6, 100);
  IngestOptions opts;
  opts.created_at = "2024-05-01T00:00:00Z";
  const IngestResult r = ingest(src.path(), out.path(), opts);
  REQUIRE(r.manifest.entries.size() == 3);
  CHECK(r.report.ingested == 3);
  CHECK(r.report.missing_label == std::vector<std::string>{"orphan.png"});
  for (int i = 0; i < 3; ++i) {
    const auto& e = r.manifest.entries[i];
    CHECK(e.index == i);
    CHECK(e.image_path == "images/00000" + std::to_string(i) + ".jpg");
    CHECK(e.label_path == "labels/00000" + std::to_string(i) + ".txt");
    CHECK(e.width == 8);
    CHECK(e.height == 6);
    CHECK(e.split == Split::unassigned);
    CHECK(detect_format(std::vector<std::uint8_t>(
              [&] { auto s = testing::read_file(out / e.image_path); return std::vector<std::uint8_t>(s.begin(), s.end()); }())) ==
          ImageFormat::jpeg);
  }
  const DatasetManifest back = read_manifest(out / kManifestFileName);
  CHECK(back.entries == r.manifest.entries);
  CHECK(back.created_at == "2024-05-01T00:00:00Z");
  CHECK(validate_manifest(back).ok());
}

TEST_CASE("ingest records undecodable images and copies JPEG sources verbatim") {
  TempDir src, out;
  fs::create_directories(src / "images");
  fs::create_directories(src / "labels");
  put_image(src / "images" / "f1.jpg", 16, 16, 50, ImageFormat::jpeg);
  testing::write_file(src / "labels" / "f1.txt", kSquare);
  testing::write_file(src / "images" / "f2.png", "garbage");
  testing::write_file(src / "labels" / "f2.txt", kSquare);
  save_image(mask_to_image(BinaryMask(16, 16)), src / "labels" / "f3.png");
  put_image(src / "images" / "f3.png", 16, 16, 80);
  const IngestResult r = ingest(src.path(), out.path());
  REQUIRE(r.manifest.entries.size() == 2);
  CHECK(r.report.undecodable.size() == 1);
  CHECK(r.report.undecodable[0].first == "f2.png");
  CHECK(testing::read_file(out / "images/000000.jpg") == testing::read_file(src / "images" / "f1.jpg"));
  CHECK(r.manifest.entries[1].label_path == "labels/000001.png");
}

TEST_CASE("flat layout accepts _mask.png labels") {
  TempDir src, out;
  put_image(src / "frame.png", 10, 10, 60);
  BinaryMask m(10, 10);
  m.set(4, 4);
  save_image(mask_to_image(m), src / "frame_mask.png");
  const IngestResult r = ingest(src.path(), out.path());
  REQUIRE(r.manifest.entries.size() == 1);
  const GroundTruth gt = load_ground_truth(r.manifest, r.manifest.entries[0]);
  CHECK(gt.semantic == m);
  CHECK(gt.instances.size() == 1);
}

TEST_CASE("ingest is idempotent on its own output") {
  TempDir src, out1, out2;
  for (int i = 0; i < 5; ++i) {
    put_image(src / ("img" + std::to_string(i) + ".png"), 12, 9, static_cast<std::uint8_t>(20 * i));
    testing::write_file(src / ("img" + std::to_string(i) + ".txt"), kSquare);
  }
  IngestOptions opts;
  opts.created_at = "2024-01-01T00:00:00Z";
  const IngestResult a = ingest(src.path(), out1.path(), opts);
  const IngestResult b = ingest(out1.path(), out2.path(), opts);
  CHECK(a.manifest.entries == b.manifest.entries);
  for (const auto& e : a.manifest.entries) {
    CHECK(testing::read_file(out1 / e.image_path) == testing::read_file(out2 / e.image_path));
    CHECK(testing::read_file(out1 / e.label_path) == testing::read_file(out2 / e.label_path));
  }
  CHECK_THROWS_AS(ingest(out1.path(), out1.path()), DataError);
}

TEST_CASE("647-frame source yields 647 entries") {
  TempDir src, out;
  fs::create_directories(src / "images");
  fs::create_directories(src / "labels");
  const auto bytes = encode_image(ImageBuffer(4, 4, 3, std::vector<std::uint8_t>(48, 90)), ImageFormat::jpeg);
  const std::string jpeg(bytes.begin(), bytes.end());
  for (int i = 0; i < 647; ++i) {
    const std::string stem = "frame_" + std::to_string(i);
    testing::write_file(src / "images" / (stem + ".jpg"), jpeg);
    testing::write_file(src / "labels" / (stem + ".txt"), kSquare);
  }
  IngestOptions opts;
  opts.workers = 4;
  const IngestResult r = ingest(src.path(), out.path(), opts);
  CHECK(r.manifest.entries.size() == 647);
  // Lexicographic: frame_0, frame_1, frame_10, frame_100, ...
  CHECK(r.manifest.entries.back().image_path == "images/000646.jpg");
  const DatasetManifest s = split_manifest(r.manifest);
  CHECK(s.in_split(Split::test).size() == 130);
}

TEST_CASE("validation findings") {
  TempDir dir;
  testing::SyntheticOptions opts;
  opts.count = 6;
  opts.width = 32;
  opts.height = 24;
  opts.split = Split::unassigned;
  auto ds = testing::make_synthetic_dataset(dir.path(), opts);
  CHECK(validate_manifest(ds.manifest).ok());

  // Truncated image.
  const auto img = dir / ds.manifest.entries[1].image_path;
  auto bytes = testing::read_file(img);
  testing::write_file(img, bytes.substr(0, bytes.size() / 3));
  // Out-of-range coordinate on line 2.
  testing::write_file(dir / ds.manifest.entries[3].label_path, std::string(kSquare) + "0 0.1 0.1 0.5 0.1 1.2 0.5\n");
  // Degenerate polygon.
  testing::write_file(dir / ds.manifest.entries[4].label_path, "0 0.1 0.1 0.2 0.2 0.3 0.3\n");
  // Declared size wrong.
  ds.manifest.entries[5].width = 31;

  const ValidationReport r = validate_manifest(ds.manifest);
  REQUIRE(r.findings.size() == 4);
  CHECK(r.findings[0].index == 1);
  CHECK(r.findings[1].index == 3);
  CHECK(r.findings[1].line == 2);
  CHECK(r.findings[1].path == ds.manifest.entries[3].label_path);
  CHECK(r.findings[2].index == 4);
  CHECK(r.findings[2].line == 1);
  CHECK(r.findings[3].index == 5);
  CHECK(validation_report_to_json(r).find("\"line\": 2") != std::string::npos);
}

TEST_CASE("validation of structure and masks") {
  TempDir dir;
  testing::SyntheticOptions opts;
  opts.count = 4;
  opts.width = 16;
  opts.height = 16;
  opts.split = Split::unassigned;
  auto ds = testing::make_synthetic_dataset(dir.path(), opts);
  DatasetManifest m = split_manifest(ds.manifest);
  m.base_dir = dir.path();
  CHECK(validate_manifest(m).ok());

  DatasetManifest swapped = m;
  std::swap(swapped.entries[0].split, swapped.entries[3].split);
  CHECK_FALSE(validate_manifest(swapped).ok());

  DatasetManifest gap = m;
  gap.entries[2].index = 7;
  CHECK_FALSE(validate_manifest(gap).ok());

  ImageBuffer gray_mask(16, 16, 1, std::vector<std::uint8_t>(256, 128));
  save_image(gray_mask, dir / "labels/bad.png");
  DatasetManifest mask = m;
  mask.entries[0].label_path = "labels/bad.png";
  const ValidationReport r = validate_manifest(mask);
  REQUIRE(r.findings.size() == 1);
  CHECK(r.findings[0].message.find("0 or 255") != std::string::npos);
}

TEST_CASE("manifest JSON round trip and schema errors") {
  DatasetManifest m;
  m.source_root = "/data/src";
  m.created_at = "2024-01-01T00:00:00Z";
  m.entries.push_back({0, "images/000000.jpg", "labels/000000.txt", 640, 640, Split::train});
  m.entries.push_back({1, "images/000001.jpg", "labels/000001.png", 640, 640, Split::test});
  const std::string text = manifest_to_json(m);
  const DatasetManifest back = manifest_from_json(text, "/somewhere");
  CHECK(back.entries == m.entries);
  CHECK(back.source_root == m.source_root);
  CHECK(back.base_dir == fs::path("/somewhere"));
  CHECK(manifest_to_json(back) == text);
  CHECK_THROWS_AS(manifest_from_json("{}", "."), DataError);
  CHECK_THROWS_AS(manifest_from_json("[1,2", "."), DataError);
  CHECK_THROWS_AS(read_manifest("/definitely/missing/manifest.json"), DataError);
}

TEST_CASE("ground truth from polygon labels") {
  TempDir dir;
  testing::SyntheticOptions opts;
  opts.count = 8;
  opts.width = 40;
  opts.height = 30;
  auto ds = testing::make_synthetic_dataset(dir.path(), opts);
  for (std::size_t i = 0; i < ds.manifest.entries.size(); ++i) {
    const GroundTruth gt = load_ground_truth(ds.manifest, ds.manifest.entries[i]);
    CHECK(gt.semantic == gt_semantic_mask(ds.labels[i], 40, 30, 0));
    CHECK(gt.instances.size() == ds.labels[i].instances.size());
  }
}
