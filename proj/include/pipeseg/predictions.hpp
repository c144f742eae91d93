#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "pipeseg/detection.hpp"

namespace pipeseg {

/// One prediction document per image:
///   {"image": name, "width": W, "height": H,
///    "instances": [{"class_id": c, "confidence": s, "polygon": [[x, y], ...]} |
///                  {"class_id": c, "confidence": s, "rle": [counts...]}]}
/// Polygons are in pixel coordinates; RLE follows decode_rle.
struct PredictionFile {
  std::string image;
  int width = 0;
  int height = 0;
  std::vector<PredictionInstance> instances;
};

/// Strict schema check. image_id defaults to the stem of the "image" field.
/// Throws DataError naming the offending field.
PredictionFile parse_prediction_json(std::string_view text, std::string image_id = {});
PredictionFile load_prediction_file(const std::filesystem::path& path);

std::string prediction_to_json(const PredictionFile& file);

}  // namespace pipeseg
