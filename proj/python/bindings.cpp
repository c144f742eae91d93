#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "pipeseg/codec.hpp"
#include "pipeseg/dataset.hpp"
#include "pipeseg/enhance.hpp"
#include "pipeseg/errors.hpp"
#include "pipeseg/labels.hpp"
#include "pipeseg/mask.hpp"
#include "pipeseg/metrics.hpp"
#include "pipeseg/pipeline.hpp"
#include "pipeseg/predictions.hpp"
#include "pipeseg/report.hpp"

namespace py = pybind11;
using namespace pipeseg;

namespace {

using u8_array = py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

ImageBuffer to_image(const u8_array& a) {
  if (a.ndim() == 2) {
    ImageBuffer img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), 1);
    std::memcpy(img.samples().data(), a.data(), img.samples().size());
    return img;
  }
  if (a.ndim() == 3 && a.shape(2) == 3) {
    ImageBuffer img(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), 3);
    std::memcpy(img.samples().data(), a.data(), img.samples().size());
    return img;
  }
  throw std::invalid_argument("expected an HxW or HxWx3 uint8 array");
}

py::array from_image(const ImageBuffer& img) {
  std::vector<py::ssize_t> shape{img.height(), img.width()};
  if (img.channels() == 3) shape.push_back(3);
  py::array_t<std::uint8_t> out(shape);
  std::memcpy(out.mutable_data(), img.samples().data(), img.samples().size());
  return out;
}

BinaryMask to_mask(const u8_array& a) {
  if (a.ndim() != 2) throw std::invalid_argument("expected an HxW mask array");
  std::vector<std::uint8_t> bits(a.data(), a.data() + a.size());
  return BinaryMask(static_cast<int>(a.shape(1)), static_cast<int>(a.shape(0)), std::move(bits));
}

py::array from_mask(const BinaryMask& m) {
  py::array_t<bool> out({m.height(), m.width()});
  auto* dst = out.mutable_data();
  for (std::size_t i = 0; i < m.size(); ++i) dst[i] = m.test(i);
  return out;
}

py::array from_field(const Field& f) {
  py::array_t<double> out({f.height(), f.width()});
  std::memcpy(out.mutable_data(), f.values().data(), f.size() * sizeof(double));
  return out;
}

py::dict record_dict(const SemanticMetricsRecord& r) {
  py::dict d;
  d["image_id"] = r.image_id;
  d["dice"] = r.dice;
  d["iou"] = r.iou;
  d["hd"] = r.hd;
  d["mad"] = r.mad;
  d["pred_pixels"] = r.pred_pixels;
  d["gt_pixels"] = r.gt_pixels;
  d["intersection_pixels"] = r.intersection_pixels;
  return d;
}

SemanticMetricsRecord record_from(const py::dict& d) {
  SemanticMetricsRecord r;
  r.image_id = d["image_id"].cast<std::string>();
  r.dice = d["dice"].cast<double>();
  r.iou = d["iou"].cast<double>();
  r.hd = d["hd"].cast<double>();
  r.mad = d["mad"].cast<double>();
  r.pred_pixels = d["pred_pixels"].cast<std::int64_t>();
  r.gt_pixels = d["gt_pixels"].cast<std::int64_t>();
  r.intersection_pixels = d["intersection_pixels"].cast<std::int64_t>();
  return r;
}

py::dict metrics_dict(const DatasetMetrics& m) {
  py::dict d;
  d["miou"] = m.miou;
  d["dice"] = m.dice;
  d["hd_mean"] = m.hd_mean;
  d["mad_mean"] = m.mad_mean;
  d["image_count"] = m.image_count;
  d["undefined_hd_count"] = m.undefined_hd_count;
  return d;
}

PolygonContour to_polygon(const std::vector<std::array<double, 2>>& pts) {
  PolygonContour p;
  for (const auto& [x, y] : pts) p.vertices.push_back({x, y});
  return p;
}

}  // namespace

PYBIND11_MODULE(_pipeseg, m) {
  m.doc() = "Segmentation evaluation, enhancement and dataset tooling";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<ImageIoError>(m, "ImageIoError", base.ptr());

  // imgproc-core
  m.def("load_image", [](const std::filesystem::path& p) { return from_image(load_image(p)); }, py::arg("path"));
  m.def(
      "save_image",
      [](const u8_array& a, const std::filesystem::path& p, const std::string& format, int quality) {
        if (format != "png" && format != "jpeg") throw std::invalid_argument("format must be png or jpeg");
        save_image(to_image(a), p, format == "png" ? ImageFormat::png : ImageFormat::jpeg, quality);
      },
      py::arg("image"), py::arg("path"), py::arg("format") = "png", py::arg("quality") = 95);
  m.def(
      "resize_bilinear", [](const u8_array& a, int w, int h) { return from_image(resize_bilinear(to_image(a), w, h)); },
      py::arg("image"), py::arg("width"), py::arg("height"));
  m.def("luma", [](const u8_array& a) { return from_image(luma(to_image(a))); }, py::arg("image"));

  // mask-geometry
  m.def(
      "rasterize_polygon",
      [](const std::vector<std::array<double, 2>>& pts, int w, int h) { return from_mask(rasterize_polygon(to_polygon(pts), w, h)); },
      py::arg("vertices"), py::arg("width"), py::arg("height"));
  m.def(
      "extract_boundary",
      [](const u8_array& a) {
        const BoundarySet b = extract_boundary(to_mask(a));
        py::array_t<int> out({static_cast<py::ssize_t>(b.points.size()), py::ssize_t{2}});
        auto r = out.mutable_unchecked<2>();
        for (std::size_t i = 0; i < b.points.size(); ++i) {
          r(i, 0) = b.points[i].x;
          r(i, 1) = b.points[i].y;
        }
        return out;
      },
      py::arg("mask"), "Boundary pixels as an Nx2 array of (x, y).");
  m.def("distance_transform", [](const u8_array& a) { return from_field(distance_transform(to_mask(a))); },
        py::arg("seeds"));
  m.def("encode_rle", [](const u8_array& a) { return encode_rle(to_mask(a)); }, py::arg("mask"));
  m.def(
      "decode_rle", [](const std::vector<std::int64_t>& c, int w, int h) { return from_mask(decode_rle(c, w, h)); },
      py::arg("counts"), py::arg("width"), py::arg("height"));

  // metrics
  m.def("dice", [](const u8_array& p, const u8_array& g) { return dice(to_mask(p), to_mask(g)); });
  m.def("iou", [](const u8_array& p, const u8_array& g) { return iou(to_mask(p), to_mask(g)); });
  m.def("hausdorff", [](const u8_array& p, const u8_array& g) { return hausdorff(to_mask(p), to_mask(g)); });
  m.def("mad", [](const u8_array& p, const u8_array& g) { return mad(to_mask(p), to_mask(g)); });
  m.def(
      "evaluate_pair",
      [](const u8_array& p, const u8_array& g, const std::string& id) { return record_dict(evaluate_pair(to_mask(p), to_mask(g), id)); },
      py::arg("pred"), py::arg("gt"), py::arg("image_id") = "");
  m.def(
      "aggregate",
      [](const std::vector<py::dict>& records) {
        std::vector<SemanticMetricsRecord> rs;
        for (const auto& d : records) rs.push_back(record_from(d));
        return metrics_dict(aggregate(rs));
      },
      py::arg("records"));

  // enhance
  m.def(
      "clahe",
      [](const u8_array& a, int tiles_x, int tiles_y, double clip_limit) {
        return from_image(clahe(to_image(a), ClaheConfig{tiles_x, tiles_y, clip_limit, 256}));
      },
      py::arg("image"), py::arg("tiles_x") = 8, py::arg("tiles_y") = 8, py::arg("clip_limit") = 2.0);
  m.def(
      "gamma_correct", [](const u8_array& a, double g) { return from_image(gamma_correct(to_image(a), GammaConfig{g})); },
      py::arg("image"), py::arg("gamma") = 0.7);
  m.def(
      "dehaze",
      [](const u8_array& a, int patch, double omega, double t0) {
        DehazeConfig cfg;
        cfg.patch = patch;
        cfg.omega = omega;
        cfg.t0 = t0;
        return from_image(dehaze(to_image(a), cfg));
      },
      py::arg("image"), py::arg("patch") = 15, py::arg("omega") = 0.95, py::arg("t0") = 0.1);
  m.def(
      "enhance",
      [](const u8_array& a, const std::string& mode) { return from_image(enhance(to_image(a), parse_enhance_mode(mode))); },
      py::arg("image"), py::arg("mode"));

  // dataset-prep
  m.def(
      "parse_yolo_seg_label",
      [](const std::string& text, int w, int h) {
        py::list out;
        for (const auto& inst : parse_yolo_seg_label(text, w, h).pixels) {
          py::list pts;
          for (const auto& v : inst.polygon.vertices) pts.append(py::make_tuple(v.x, v.y));
          out.append(py::make_tuple(inst.class_id, pts));
        }
        return out;
      },
      py::arg("text"), py::arg("width"), py::arg("height"), "Instances as (class_id, [(x, y), ...]) in pixels.");
  m.def(
      "split_sizes",
      [](std::size_t n) {
        const SplitSizes s = split_sizes(n);
        return py::make_tuple(s.train, s.val, s.test);
      },
      py::arg("n"));
  m.def(
      "prepare",
      [](const std::filesystem::path& src, const std::filesystem::path& out, bool split, int workers) {
        IngestOptions opts;
        opts.workers = workers;
        IngestResult r = ingest(src, out, opts);
        if (split) write_manifest(split_manifest(r.manifest), out / kManifestFileName);
        py::dict d;
        d["ingested"] = r.report.ingested;
        d["missing_label"] = r.report.missing_label;
        d["undecodable"] = r.report.undecodable;
        d["manifest"] = (out / kManifestFileName).string();
        return d;
      },
      py::arg("src"), py::arg("out"), py::arg("split") = true, py::arg("workers") = 1);
  m.def(
      "validate_manifest",
      [](const std::filesystem::path& p) { return validation_report_to_json(validate_manifest(read_manifest(p))); },
      py::arg("manifest"), "Validation report as a JSON string.");

  // predictions and report-cli
  m.def(
      "parse_prediction_json",
      [](const std::string& text) {
        const PredictionFile f = parse_prediction_json(text);
        py::dict d;
        d["image"] = f.image;
        d["width"] = f.width;
        d["height"] = f.height;
        d["instance_count"] = f.instances.size();
        return d;
      },
      py::arg("text"), "Validates a prediction document against the schema; raises DataError otherwise.");
  m.def(
      "evaluate",
      [](const std::filesystem::path& manifest, const std::filesystem::path& preds, const std::filesystem::path& out,
         double threshold, double step, const std::string& mode, int workers, const std::string& model) {
        RunConfig cfg;
        cfg.manifest_path = manifest;
        cfg.predictions_dir = preds;
        cfg.output_dir = out;
        cfg.confidence_threshold = threshold;
        cfg.curve_step = step;
        cfg.enhancement_mode = parse_enhance_mode(mode);
        cfg.workers = workers;
        cfg.model = model;
        EvaluationOutput r;
        {
          py::gil_scoped_release release;
          r = run_evaluate(cfg);
        }
        return run_result_to_json(r.result);
      },
      py::arg("manifest"), py::arg("pred_dir"), py::arg("output_dir") = std::filesystem::path(),
      py::arg("threshold") = 0.5, py::arg("step") = 0.001, py::arg("mode") = "original", py::arg("workers") = 1,
      py::arg("model") = "", "Runs the evaluation and returns the result document as a JSON string.");
  m.def(
      "render_table",
      [](const std::vector<std::string>& results, const std::string& style, bool sort) {
        std::vector<RunResult> rs;
        for (const auto& r : results) rs.push_back(run_result_from_json(r));
        const RenderedTable t = render_table(rs, parse_table_style(style), sort);
        py::dict d;
        d["markdown"] = t.markdown;
        d["csv"] = t.csv;
        d["latex"] = t.latex;
        return d;
      },
      py::arg("results"), py::arg("style") = "table2", py::arg("sort") = false,
      "Renders result JSON documents as markdown, CSV and LaTeX tables.");
}
