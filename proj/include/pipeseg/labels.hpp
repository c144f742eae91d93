#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "pipeseg/mask.hpp"

namespace pipeseg {

struct LabelInstance {
  int class_id = 0;
  PolygonContour polygon;
};

/// Ground-truth instances with polygon coordinates normalized to [0, 1].
struct GroundTruthLabel {
  std::vector<LabelInstance> instances;
};

struct ParsedLabel {
  GroundTruthLabel normalized;
  std::vector<LabelInstance> pixels;  // same instances scaled by (width, height)
  std::vector<std::size_t> lines;     // 1-based source line of each instance
};

/// Parses polygon label text: one instance per line, "class_id x1 y1 x2 y2 ...".
/// Blank lines are skipped. Throws ParseError (with the 1-based line) for a non-numeric
/// token, an odd or short coordinate list, or a coordinate outside [0, 1].
ParsedLabel parse_yolo_seg_label(std::string_view text, int width, int height);

std::string format_yolo_seg_label(const GroundTruthLabel& label);

PolygonContour scale_polygon(const PolygonContour& normalized, int width, int height);

/// Union of the rasterized polygons of one class.
BinaryMask gt_semantic_mask(const GroundTruthLabel& label, int width, int height, int class_id);

/// One mask per polygon of the class, in label order.
std::vector<BinaryMask> gt_instance_masks(const GroundTruthLabel& label, int width, int height,
                                          int class_id);

}  // namespace pipeseg
