#include "pipeseg/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include <json.hpp>

#include "pipeseg/errors.hpp"

namespace pipeseg {

namespace {

using json = nlohmann::ordered_json;

json point_json(const CurvePoint& p) {
  json j;
  j["threshold"] = p.threshold;
  j["precision"] = p.precision;
  j["recall"] = p.recall;
  j["f1"] = p.f1;
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string row_name(const RunResult& r) { return r.model.empty() ? r.label : r.model; }

}  // namespace

std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

std::string run_result_to_json(const RunResult& r) {
  json doc;
  doc["label"] = r.label;
  doc["model"] = r.model;
  doc["enhancement"] = r.enhancement;
  doc["confidence_threshold"] = r.confidence_threshold;
  const DatasetMetrics& m = r.dataset_metrics;
  doc["dataset_metrics"] = {{"miou", m.miou},         {"dice", m.dice},
                            {"hd_mean", m.hd_mean},   {"mad_mean", m.mad_mean},
                            {"image_count", m.image_count}, {"undefined_hd_count", m.undefined_hd_count}};
  json per = json::array();
  for (const auto& [thr, ap] : r.ap.per_threshold) per.push_back({thr, ap});
  doc["ap"] = {{"ap50", r.ap.ap50}, {"ap50_95", r.ap.ap50_95}, {"per_threshold", per}};
  doc["best_f1"] = point_json(r.best_f1);
  return doc.dump(2) + "\n";
}

RunResult run_result_from_json(std::string_view text) {
  RunResult r;
  try {
    const json doc = json::parse(text);
    r.label = doc.at("label").get<std::string>();
    r.model = doc.value("model", std::string());
    r.enhancement = doc.value("enhancement", std::string());
    r.confidence_threshold = doc.value("confidence_threshold", 0.5);
    const json& m = doc.at("dataset_metrics");
    r.dataset_metrics.miou = m.at("miou").get<double>();
    r.dataset_metrics.dice = m.at("dice").get<double>();
    r.dataset_metrics.hd_mean = m.at("hd_mean").get<double>();
    r.dataset_metrics.mad_mean = m.at("mad_mean").get<double>();
    r.dataset_metrics.image_count = m.value("image_count", std::int64_t{0});
    r.dataset_metrics.undefined_hd_count = m.value("undefined_hd_count", std::int64_t{0});
    if (doc.contains("ap")) {
      const json& ap = doc.at("ap");
      r.ap.ap50 = ap.at("ap50").get<double>();
      r.ap.ap50_95 = ap.at("ap50_95").get<double>();
      for (const auto& p : ap.at("per_threshold")) r.ap.per_threshold.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    if (doc.contains("best_f1")) {
      const json& b = doc.at("best_f1");
      r.best_f1 = {b.at("threshold").get<double>(), b.at("precision").get<double>(), b.at("recall").get<double>(),
                   b.at("f1").get<double>()};
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed result document: ") + e.what());
  }
  return r;
}

RunResult read_run_result(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return run_result_from_json(text);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::string record_to_json_line(const SemanticMetricsRecord& r) {
  json j;
  j["image_id"] = r.image_id;
  j["dice"] = r.dice;
  j["iou"] = r.iou;
  j["hd"] = r.hd;
  j["mad"] = r.mad;
  j["pred_pixels"] = r.pred_pixels;
  j["gt_pixels"] = r.gt_pixels;
  j["intersection_pixels"] = r.intersection_pixels;
  return j.dump();
}

SemanticMetricsRecord record_from_json_line(std::string_view line) {
  SemanticMetricsRecord r;
  try {
    const json j = json::parse(line);
    r.image_id = j.at("image_id").get<std::string>();
    r.dice = j.at("dice").get<double>();
    r.iou = j.at("iou").get<double>();
    r.hd = j.at("hd").get<double>();
    r.mad = j.at("mad").get<double>();
    r.pred_pixels = j.at("pred_pixels").get<std::int64_t>();
    r.gt_pixels = j.at("gt_pixels").get<std::int64_t>();
    r.intersection_pixels = j.at("intersection_pixels").get<std::int64_t>();
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed metrics record: ") + e.what());
  }
  return r;
}

std::string records_to_jsonl(std::span<const SemanticMetricsRecord> records) {
  std::string out;
  for (const auto& r : records) out += record_to_json_line(r) + "\n";
  return out;
}

std::string curve_to_csv(const ConfidenceCurve& curve) {
  std::string out = "threshold,precision,recall,f1\n";
  for (const auto& p : curve.points) {
    out += format_fixed(p.threshold, 6) + "," + format_fixed(p.precision, 6) + "," + format_fixed(p.recall, 6) +
           "," + format_fixed(p.f1, 6) + "\n";
  }
  return out;
}

TableStyle parse_table_style(std::string_view name) {
  if (name == "table2") return TableStyle::table2;
  if (name == "table3") return TableStyle::table3;
  throw std::invalid_argument("unknown table style '" + std::string(name) + "' (expected table2 or table3)");
}

RenderedTable render_table(std::span<const RunResult> results, TableStyle style, bool sort_by_label) {
  std::vector<const RunResult*> rows;
  for (const auto& r : results) rows.push_back(&r);
  if (sort_by_label) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) { return a->label < b->label; });
  }

  std::vector<std::string> header{"Model"};
  if (style == TableStyle::table3) header.push_back("Enhancement");
  for (const char* h : {"mIoU", "Dice", "HD", "MAD"}) header.push_back(h);

  std::vector<std::vector<std::string>> cells;
  for (const auto* r : rows) {
    std::vector<std::string> row{row_name(*r)};
    if (style == TableStyle::table3) row.push_back(r->enhancement);
    const DatasetMetrics& m = r->dataset_metrics;
    row.push_back(format_fixed(m.miou, 4));
    row.push_back(format_fixed(m.dice, 4));
    row.push_back(format_fixed(m.hd_mean, 2));
    row.push_back(format_fixed(m.mad_mean, 2));
    cells.push_back(std::move(row));
  }

  RenderedTable t;
  auto join = [](const std::vector<std::string>& v, const std::string& sep) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? sep : "") + v[i];
    return s;
  };

  t.markdown = "| " + join(header, " | ") + " |\n|";
  const std::size_t label_cols = style == TableStyle::table3 ? 2 : 1;
  for (std::size_t i = 0; i < header.size(); ++i) t.markdown += i < label_cols ? "---|" : "---:|";
  t.markdown += "\n";
  for (const auto& row : cells) t.markdown += "| " + join(row, " | ") + " |\n";

  std::vector<std::string> csv_header;
  for (const auto& h : header) csv_header.push_back(csv_field(h));
  t.csv = join(csv_header, ",") + "\n";
  for (const auto& row : cells) {
    std::vector<std::string> escaped;
    for (const auto& c : row) escaped.push_back(csv_field(c));
    t.csv += join(escaped, ",") + "\n";
  }

  t.latex = std::string("\\begin{tabular}{") + (style == TableStyle::table3 ? "llcccc" : "lcccc") + "}\n\\toprule\n";
  t.latex += join(header, " & ") + " \\\\\n\\midrule\n";
  for (const auto& row : cells) t.latex += join(row, " & ") + " \\\\\n";
  t.latex += "\\bottomrule\n\\end{tabular}\n";
  return t;
}

}  // namespace pipeseg
