#include "support/synthetic.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "pipeseg/codec.hpp"
#include "pipeseg/detection.hpp"
#include "pipeseg/predictions.hpp"

namespace pipeseg::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  const auto stamp = std::chrono::steady_clock::now().time_since_epoch().count();
  path_ = fs::temp_directory_path() /
          (tag + "-" + std::to_string(stamp) + "-" + std::to_string(counter++));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

BinaryMask random_mask(std::mt19937& rng, int width, int height, double density) {
  std::bernoulli_distribution bit(density);
  BinaryMask m(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) m.set(x, y, bit(rng));
  return m;
}

BinaryMask random_blob_mask(std::mt19937& rng, int width, int height) {
  BinaryMask m(width, height);
  std::uniform_int_distribution<int> blobs(0, 3);
  std::uniform_real_distribution<double> ux(0.0, width), uy(0.0, height);
  std::uniform_real_distribution<double> ur(0.5, std::max(1.0, std::min(width, height) / 3.0));
  const int n = blobs(rng);
  for (int b = 0; b < n; ++b) {
    const double cx = ux(rng), cy = uy(rng), r = ur(rng);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (std::hypot(x + 0.5 - cx, y + 0.5 - cy) <= r) m.set(x, y);
  }
  return m;
}

ImageBuffer random_image(std::mt19937& rng, int width, int height, int channels) {
  std::uniform_int_distribution<int> v(0, 255);
  ImageBuffer img(width, height, channels);
  for (auto& s : img.samples()) s = static_cast<std::uint8_t>(v(rng));
  return img;
}

PolygonContour random_normalized_polygon(std::mt19937& rng) {
  std::uniform_real_distribution<double> centre(0.15, 0.85);
  std::uniform_real_distribution<double> radius(0.05, 0.3);
  std::uniform_real_distribution<double> jitter(0.6, 1.0);
  std::uniform_int_distribution<int> count(3, 9);
  const double cx = centre(rng), cy = centre(rng), r = radius(rng);
  const int k = count(rng);
  PolygonContour poly;
  for (int i = 0; i < k; ++i) {
    const double a = 2.0 * M_PI * i / k;
    const double rr = r * jitter(rng);
    poly.vertices.push_back({std::clamp(cx + rr * std::cos(a), 0.0, 1.0), std::clamp(cy + rr * std::sin(a), 0.0, 1.0)});
  }
  return poly;
}

GroundTruthLabel random_label(std::mt19937& rng, int max_instances) {
  std::uniform_int_distribution<int> count(0, max_instances);
  GroundTruthLabel label;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) label.instances.push_back({0, random_normalized_polygon(rng)});
  return label;
}

ImageBuffer render_scene(const BinaryMask& semantic, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> noise(-6, 6);
  const int w = semantic.width(), h = semantic.height();
  ImageBuffer img(w, h, 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int base = 40 + 60 * y / std::max(1, h - 1);
      const int lift = semantic.at(x, y) ? 70 : 0;
      img.at(x, y, 0) = static_cast<std::uint8_t>(std::clamp(base / 3 + lift + noise(rng), 0, 255));
      img.at(x, y, 1) = static_cast<std::uint8_t>(std::clamp(base + lift + noise(rng), 0, 255));
      img.at(x, y, 2) = static_cast<std::uint8_t>(std::clamp(base + 40 + lift / 2 + noise(rng), 0, 255));
    }
  }
  return img;
}

SyntheticDataset make_synthetic_dataset(const fs::path& root, const SyntheticOptions& opts) {
  SyntheticDataset ds;
  ds.root = root;
  ds.manifest_path = root / kManifestFileName;
  fs::create_directories(root / "images");
  fs::create_directories(root / "labels");
  std::mt19937 rng(opts.seed);
  ds.manifest.source_root = "synthetic";
  ds.manifest.created_at = "2024-01-01T00:00:00Z";
  ds.manifest.base_dir = root;
  for (int i = 0; i < opts.count; ++i) {
    char stem[16];
    std::snprintf(stem, sizeof stem, "%06d", i);
    GroundTruthLabel label = random_label(rng, opts.max_instances);
    // Store exactly what the label file will hold so tests see the same geometry as the loader.
    const std::string text = format_yolo_seg_label(label);
    label = parse_yolo_seg_label(text, opts.width, opts.height).normalized;
    write_file(root / "labels" / (std::string(stem) + ".txt"), text);
    const BinaryMask semantic = gt_semantic_mask(label, opts.width, opts.height, 0);
    save_image(render_scene(semantic, opts.seed * 7919u + static_cast<std::uint32_t>(i)),
               root / "images" / (std::string(stem) + ".jpg"), ImageFormat::jpeg, 90);
    ManifestEntry e;
    e.index = i;
    e.image_path = std::string("images/") + stem + ".jpg";
    e.label_path = std::string("labels/") + stem + ".txt";
    e.width = opts.width;
    e.height = opts.height;
    e.split = opts.split;
    ds.manifest.entries.push_back(e);
    ds.labels.push_back(std::move(label));
  }
  write_manifest(ds.manifest, ds.manifest_path);
  return ds;
}

void write_perfect_predictions(const SyntheticDataset& ds, const fs::path& pred_dir, double confidence) {
  fs::create_directories(pred_dir);
  for (const auto* e : ds.manifest.in_split(Split::test)) {
    const GroundTruth gt = load_ground_truth(ds.manifest, *e, 0);
    PredictionFile pf;
    pf.image = fs::path(e->image_path).filename().string();
    pf.width = e->width;
    pf.height = e->height;
    for (const auto& m : gt.instances) {
      pf.instances.push_back({e->image_id(), 0, confidence, RleGeometry{encode_rle(m)}});
    }
    write_file(pred_dir / (e->image_id() + ".json"), prediction_to_json(pf));
  }
}

void write_empty_predictions(const SyntheticDataset& ds, const fs::path& pred_dir) {
  fs::create_directories(pred_dir);
  for (const auto* e : ds.manifest.in_split(Split::test)) {
    PredictionFile pf;
    pf.image = fs::path(e->image_path).filename().string();
    pf.width = e->width;
    pf.height = e->height;
    write_file(pred_dir / (e->image_id() + ".json"), prediction_to_json(pf));
  }
}

}  // namespace pipeseg::testing
