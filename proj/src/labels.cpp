#include "pipeseg/labels.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pipeseg/errors.hpp"

namespace pipeseg {

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

double parse_number(std::string_view tok, std::size_t line) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ParseError(line, "non-numeric token '" + std::string(tok) + "'");
  }
  return v;
}

int parse_class(std::string_view tok, std::size_t line) {
  int v = 0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end || v < 0) {
    throw ParseError(line, "class id must be a nonnegative integer, got '" + std::string(tok) + "'");
  }
  return v;
}

}  // namespace

PolygonContour scale_polygon(const PolygonContour& normalized, int width, int height) {
  PolygonContour out;
  out.vertices.reserve(normalized.vertices.size());
  for (const auto& p : normalized.vertices) out.vertices.push_back({p.x * width, p.y * height});
  return out;
}

ParsedLabel parse_yolo_seg_label(std::string_view text, int width, int height) {
  ParsedLabel out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    const std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    ++line_no;
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;

    const auto tokens = split_tokens(line);
    if (tokens.empty()) continue;
    const std::size_t coords = tokens.size() - 1;
    if (coords % 2 != 0) throw ParseError(line_no, "odd number of coordinates (" + std::to_string(coords) + ")");
    if (coords < 6) throw ParseError(line_no, "polygon needs at least 3 points, got " + std::to_string(coords / 2));

    LabelInstance inst;
    inst.class_id = parse_class(tokens[0], line_no);
    for (std::size_t i = 1; i < tokens.size(); i += 2) {
      const double x = parse_number(tokens[i], line_no);
      const double y = parse_number(tokens[i + 1], line_no);
      if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0) {
        throw ParseError(line_no, "coordinate outside [0, 1]: (" + std::string(tokens[i]) + ", " +
                                      std::string(tokens[i + 1]) + ")");
      }
      inst.polygon.vertices.push_back({x, y});
    }
    out.pixels.push_back({inst.class_id, scale_polygon(inst.polygon, width, height)});
    out.lines.push_back(line_no);
    out.normalized.instances.push_back(std::move(inst));
  }
  return out;
}

std::string format_yolo_seg_label(const GroundTruthLabel& label) {
  std::string out;
  char buf[64];
  for (const auto& inst : label.instances) {
    out += std::to_string(inst.class_id);
    for (const auto& p : inst.polygon.vertices) {
      std::snprintf(buf, sizeof buf, " %.6f %.6f", p.x, p.y);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

BinaryMask gt_semantic_mask(const GroundTruthLabel& label, int width, int height, int class_id) {
  BinaryMask out(width, height);
  for (const auto& inst : label.instances) {
    if (inst.class_id != class_id) continue;
    const BinaryMask m = rasterize_polygon(scale_polygon(inst.polygon, width, height), width, height);
    auto dst = out.bits();
    auto src = m.bits();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] |= src[i];
  }
  return out;
}

std::vector<BinaryMask> gt_instance_masks(const GroundTruthLabel& label, int width, int height,
                                          int class_id) {
  std::vector<BinaryMask> out;
  for (const auto& inst : label.instances) {
    if (inst.class_id != class_id) continue;
    out.push_back(rasterize_polygon(scale_polygon(inst.polygon, width, height), width, height));
  }
  return out;
}

}  // namespace pipeseg
