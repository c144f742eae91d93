#include "pipeseg/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "pipeseg/codec.hpp"
#include "pipeseg/errors.hpp"
#include "pipeseg/parallel.hpp"

namespace pipeseg {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_image_name(const fs::path& p) {
  const std::string ext = lower(p.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot read " + p.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<std::uint8_t> read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ImageIoError(ImageIoError::Kind::unreadable, "cannot open " + p.string());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + p.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write error on " + p.string());
}

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string zero_padded(int index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%06d", index);
  return buf;
}

Split parse_split(const json& v) {
  if (v.is_null()) return Split::unassigned;
  const std::string s = v.get<std::string>();
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw DataError("unknown split '" + s + "'");
}

struct Candidate {
  fs::path image;
  fs::path label;
  int width = 0;
  int height = 0;
  bool jpeg = false;
  std::string error;
};

}  // namespace

std::string_view to_string(Split s) noexcept {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::unassigned: break;
  }
  return "unassigned";
}

std::string ManifestEntry::image_id() const { return fs::path(image_path).stem().string(); }

std::vector<const ManifestEntry*> DatasetManifest::in_split(Split s) const {
  std::vector<const ManifestEntry*> out;
  for (const auto& e : entries) {
    if (e.split == s) out.push_back(&e);
  }
  return out;
}

std::string manifest_to_json(const DatasetManifest& m) {
  json entries = json::array();
  for (const auto& e : m.entries) {
    json j;
    j["index"] = e.index;
    j["image_path"] = e.image_path;
    j["label_path"] = e.label_path;
    j["width"] = e.width;
    j["height"] = e.height;
    j["split"] = e.split == Split::unassigned ? json(nullptr) : json(std::string(to_string(e.split)));
    entries.push_back(std::move(j));
  }
  json doc;
  doc["source_root"] = m.source_root;
  doc["created_at"] = m.created_at;
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text, fs::path base_dir) {
  DatasetManifest m;
  m.base_dir = std::move(base_dir);
  try {
    const json doc = json::parse(text);
    m.source_root = doc.at("source_root").get<std::string>();
    m.created_at = doc.at("created_at").get<std::string>();
    for (const auto& j : doc.at("entries")) {
      ManifestEntry e;
      e.index = j.at("index").get<int>();
      e.image_path = j.at("image_path").get<std::string>();
      e.label_path = j.at("label_path").get<std::string>();
      e.width = j.at("width").get<int>();
      e.height = j.at("height").get<int>();
      e.split = parse_split(j.at("split"));
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

void write_manifest(const DatasetManifest& m, const fs::path& path) {
  const std::string text = manifest_to_json(m);
  write_bytes(path, std::vector<std::uint8_t>(text.begin(), text.end()));
}

DatasetManifest read_manifest(const fs::path& path) {
  return manifest_from_json(read_text(path), path.parent_path());
}

IngestResult ingest(const fs::path& src_dir, const fs::path& out_dir, const IngestOptions& opts) {
  if (!fs::is_directory(src_dir)) throw DataError("source directory " + src_dir.string() + " does not exist");
  const bool split_layout = fs::is_directory(src_dir / "images");
  const fs::path image_dir = split_layout ? src_dir / "images" : src_dir;
  const fs::path label_dir = split_layout ? src_dir / "labels" : src_dir;

  std::vector<fs::path> images;
  for (const auto& de : fs::directory_iterator(image_dir)) {
    if (!de.is_regular_file() || !is_image_name(de.path())) continue;
    if (!split_layout && ends_with(lower(de.path().stem().string()), "_mask")) continue;
    images.push_back(de.path());
  }
  std::sort(images.begin(), images.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

  IngestResult result;
  std::vector<Candidate> candidates;
  for (const auto& img : images) {
    const std::string stem = img.stem().string();
    fs::path label;
    if (fs::is_regular_file(label_dir / (stem + ".txt"))) {
      label = label_dir / (stem + ".txt");
    } else if (!split_layout && fs::is_regular_file(label_dir / (stem + "_mask.png"))) {
      label = label_dir / (stem + "_mask.png");
    } else if (split_layout && fs::is_regular_file(label_dir / (stem + ".png"))) {
      label = label_dir / (stem + ".png");
    }
    if (label.empty()) {
      result.report.missing_label.push_back(img.filename().string());
      continue;
    }
    candidates.push_back(Candidate{img, label, 0, 0, false, {}});
  }

  parallel_for(candidates.size(), opts.workers, [&](std::size_t i) {
    Candidate& c = candidates[i];
    try {
      const auto bytes = read_bytes(c.image);
      c.jpeg = detect_format(bytes) == ImageFormat::jpeg;
      const ImageBuffer decoded = decode_image(bytes);
      c.width = decoded.width();
      c.height = decoded.height();
    } catch (const ImageIoError& e) {
      c.error = e.what();
    }
  });

  fs::create_directories(out_dir / "images");
  fs::create_directories(out_dir / "labels");
  if (fs::equivalent(image_dir, out_dir / "images")) {
    throw DataError("output directory must differ from the source directory");
  }

  DatasetManifest& m = result.manifest;
  m.source_root = fs::absolute(src_dir).lexically_normal().string();
  m.created_at = opts.created_at.empty() ? utc_now() : opts.created_at;
  m.base_dir = out_dir;
  std::vector<const Candidate*> accepted;
  for (const auto& c : candidates) {
    if (!c.error.empty()) {
      result.report.undecodable.emplace_back(c.image.filename().string(), c.error);
      continue;
    }
    ManifestEntry e;
    e.index = static_cast<int>(m.entries.size());
    const std::string name = zero_padded(e.index);
    e.image_path = "images/" + name + ".jpg";
    e.label_path = "labels/" + name + lower(c.label.extension().string());
    e.width = c.width;
    e.height = c.height;
    m.entries.push_back(std::move(e));
    accepted.push_back(&c);
  }

  parallel_for(accepted.size(), opts.workers, [&](std::size_t i) {
    const Candidate& c = *accepted[i];
    const ManifestEntry& e = m.entries[i];
    if (c.jpeg) {
      write_bytes(out_dir / e.image_path, read_bytes(c.image));
    } else {
      save_image(load_image(c.image), out_dir / e.image_path, ImageFormat::jpeg, opts.jpeg_quality);
    }
    fs::copy_file(c.label, out_dir / e.label_path, fs::copy_options::overwrite_existing);
  });

  result.report.ingested = m.entries.size();
  write_manifest(m, out_dir / kManifestFileName);
  return result;
}

SplitSizes split_sizes(std::size_t n) {
  if (n < 3) throw DataError("need at least 3 entries to split, got " + std::to_string(n));
  SplitSizes s;
  s.train = n * 6 / 10;
  s.val = n * 2 / 10;
  s.test = n - s.train - s.val;
  return s;
}

DatasetManifest split_manifest(const DatasetManifest& m) {
  const SplitSizes sizes = split_sizes(m.entries.size());
  DatasetManifest out = m;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    auto& e = out.entries[i];
    if (e.split != Split::unassigned) throw DataError("manifest already has a split assignment");
    e.split = i < sizes.train ? Split::train : i < sizes.train + sizes.val ? Split::val : Split::test;
  }
  return out;
}

ValidationReport validate_manifest(const DatasetManifest& m) {
  ValidationReport r;
  auto add = [&r](int index, std::string path, std::size_t line, std::string msg) {
    r.findings.push_back({index, std::move(path), line, std::move(msg)});
  };

  // Manifest-level invariants.
  bool any_assigned = false, any_unassigned = false;
  int last_rank = 0;
  for (std::size_t i = 0; i < m.entries.size(); ++i) {
    const auto& e = m.entries[i];
    if (e.index != static_cast<int>(i)) {
      add(e.index, e.image_path, 0, "index " + std::to_string(e.index) + " at position " + std::to_string(i));
    }
    if (e.split == Split::unassigned) {
      any_unassigned = true;
      continue;
    }
    any_assigned = true;
    const int rank = static_cast<int>(e.split);
    if (rank < last_rank) add(e.index, e.image_path, 0, "split order is not train < val < test");
    last_rank = std::max(last_rank, rank);
  }
  if (any_assigned && any_unassigned) add(-1, "", 0, "some entries have no split assignment");

  for (const auto& e : m.entries) {
    const fs::path image = m.resolve(e.image_path);
    try {
      const ImageBuffer img = load_image(image);
      if (img.width() != e.width || img.height() != e.height) {
        add(e.index, e.image_path, 0,
            "image is " + std::to_string(img.width()) + "x" + std::to_string(img.height()) + ", manifest says " +
                std::to_string(e.width) + "x" + std::to_string(e.height));
      }
    } catch (const ImageIoError& err) {
      add(e.index, e.image_path, 0, err.what());
    }

    const fs::path label = m.resolve(e.label_path);
    const std::string ext = lower(label.extension().string());
    try {
      if (ext == ".txt") {
        const ParsedLabel parsed = parse_yolo_seg_label(read_text(label), e.width, e.height);
        for (std::size_t k = 0; k < parsed.pixels.size(); ++k) {
          if (polygon_area(parsed.pixels[k].polygon) < 1e-9) {
            add(e.index, e.label_path, parsed.lines[k], "degenerate polygon (zero area)");
          }
        }
      } else if (ext == ".png") {
        const ImageBuffer mask = load_image(label);
        if (mask.channels() != 1) {
          add(e.index, e.label_path, 0, "mask must be single-channel");
        } else if (mask.width() != e.width || mask.height() != e.height) {
          add(e.index, e.label_path, 0, "mask size differs from the image");
        } else if (std::any_of(mask.samples().begin(), mask.samples().end(),
                               [](std::uint8_t v) { return v != 0 && v != 255; })) {
          add(e.index, e.label_path, 0, "mask values must be 0 or 255");
        }
      } else {
        add(e.index, e.label_path, 0, "unsupported label format");
      }
    } catch (const ParseError& err) {
      add(e.index, e.label_path, err.line(), err.what());
    } catch (const Error& err) {
      add(e.index, e.label_path, 0, err.what());
    }
  }
  return r;
}

std::string validation_report_to_json(const ValidationReport& r) {
  json findings = json::array();
  for (const auto& f : r.findings) {
    json j;
    j["index"] = f.index;
    j["path"] = f.path;
    j["line"] = f.line;
    j["message"] = f.message;
    findings.push_back(std::move(j));
  }
  json doc;
  doc["ok"] = r.ok();
  doc["findings"] = std::move(findings);
  return doc.dump(2) + "\n";
}

GroundTruth load_ground_truth(const DatasetManifest& m, const ManifestEntry& e, int class_id) {
  const fs::path label = m.resolve(e.label_path);
  const std::string ext = lower(label.extension().string());
  GroundTruth gt;
  if (ext == ".txt") {
    const ParsedLabel parsed = parse_yolo_seg_label(read_text(label), e.width, e.height);
    gt.semantic = gt_semantic_mask(parsed.normalized, e.width, e.height, class_id);
    gt.instances = gt_instance_masks(parsed.normalized, e.width, e.height, class_id);
  } else if (ext == ".png") {
    const BinaryMask mask = mask_from_image(load_image(label));
    if (mask.width() != e.width || mask.height() != e.height) {
      throw DimensionMismatch("ground-truth mask for " + e.image_id() + " is not " + std::to_string(e.width) +
                              "x" + std::to_string(e.height));
    }
    if (class_id == 0) {
      gt.semantic = mask;
      if (!mask.empty()) gt.instances.push_back(mask);
    } else {
      gt.semantic = BinaryMask(e.width, e.height);
    }
  } else {
    throw DataError("unsupported label format " + label.string());
  }
  return gt;
}

}  // namespace pipeseg
