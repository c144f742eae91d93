#include "pipeseg/predictions.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "pipeseg/errors.hpp"

namespace pipeseg {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw DataError("prediction schema: " + where + ": " + what);
}

int get_int(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) fail(where, std::string("missing '") + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number_integer()) fail(where, std::string("'") + key + "' must be an integer");
  return v.get<int>();
}

PredictionInstance parse_instance(const json& j, const std::string& where, const PredictionFile& file) {
  if (!j.is_object()) fail(where, "instance must be an object");
  PredictionInstance inst;
  inst.class_id = get_int(j, "class_id", where);
  if (!j.contains("confidence") || !j.at("confidence").is_number()) fail(where, "'confidence' must be a number");
  inst.confidence = j.at("confidence").get<double>();
  if (!(inst.confidence >= 0.0 && inst.confidence <= 1.0)) fail(where, "'confidence' outside [0, 1]");

  const bool has_poly = j.contains("polygon");
  const bool has_rle = j.contains("rle");
  if (has_poly == has_rle) fail(where, "exactly one of 'polygon' or 'rle' is required");
  if (has_poly) {
    const json& pts = j.at("polygon");
    if (!pts.is_array() || pts.size() < 3) fail(where, "'polygon' needs at least 3 points");
    PolygonContour poly;
    for (const auto& p : pts) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        fail(where, "polygon points must be [x, y] number pairs");
      }
      const double x = p[0].get<double>(), y = p[1].get<double>();
      if (!std::isfinite(x) || !std::isfinite(y)) fail(where, "polygon coordinates must be finite");
      poly.vertices.push_back({x, y});
    }
    inst.geometry = std::move(poly);
  } else {
    const json& counts = j.at("rle");
    if (!counts.is_array()) fail(where, "'rle' must be an array of counts");
    RleGeometry rle;
    std::int64_t sum = 0;
    for (const auto& c : counts) {
      if (!c.is_number_integer() || c.get<std::int64_t>() < 0) fail(where, "RLE counts must be nonnegative integers");
      rle.counts.push_back(c.get<std::int64_t>());
      sum += rle.counts.back();
    }
    const std::int64_t expected = static_cast<std::int64_t>(file.width) * file.height;
    if (sum != expected) {
      fail(where, "RLE counts sum to " + std::to_string(sum) + ", expected " + std::to_string(expected));
    }
    inst.geometry = std::move(rle);
  }
  return inst;
}

}  // namespace

PredictionFile parse_prediction_json(std::string_view text, std::string image_id) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("prediction file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail("document", "must be an object");
  PredictionFile file;
  if (!doc.contains("image") || !doc.at("image").is_string()) fail("document", "'image' must be a string");
  file.image = doc.at("image").get<std::string>();
  file.width = get_int(doc, "width", "document");
  file.height = get_int(doc, "height", "document");
  if (file.width < 1 || file.height < 1) fail("document", "width and height must be positive");
  if (!doc.contains("instances") || !doc.at("instances").is_array()) fail("document", "'instances' must be an array");
  if (image_id.empty()) image_id = std::filesystem::path(file.image).stem().string();

  const json& instances = doc.at("instances");
  for (std::size_t i = 0; i < instances.size(); ++i) {
    PredictionInstance inst = parse_instance(instances[i], "instances[" + std::to_string(i) + "]", file);
    inst.image_id = image_id;
    file.instances.push_back(std::move(inst));
  }
  return file;
}

PredictionFile load_prediction_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing prediction file " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_prediction_json(text, path.stem().string());
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string prediction_to_json(const PredictionFile& file) {
  json doc;
  doc["image"] = file.image;
  doc["width"] = file.width;
  doc["height"] = file.height;
  json instances = json::array();
  for (const auto& inst : file.instances) {
    json j;
    j["class_id"] = inst.class_id;
    j["confidence"] = inst.confidence;
    if (const auto* poly = std::get_if<PolygonContour>(&inst.geometry)) {
      json pts = json::array();
      for (const auto& p : poly->vertices) pts.push_back({p.x, p.y});
      j["polygon"] = std::move(pts);
    } else {
      j["rle"] = std::get<RleGeometry>(inst.geometry).counts;
    }
    instances.push_back(std::move(j));
  }
  doc["instances"] = std::move(instances);
  return doc.dump() + "\n";
}

}  // namespace pipeseg
