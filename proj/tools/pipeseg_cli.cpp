#include <cstdio>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeseg/dataset.hpp"
#include "pipeseg/enhance.hpp"
#include "pipeseg/errors.hpp"
#include "pipeseg/pipeline.hpp"
#include "pipeseg/report.hpp"

namespace {

using namespace pipeseg;

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

struct EnhanceFlags {
  std::string mode = "original";
  double clip_limit = ClaheConfig{}.clip_limit;
  std::string tiles = "8x8";
  double gamma = GammaConfig{}.gamma;
  double omega = DehazeConfig{}.omega;
  double t0 = DehazeConfig{}.t0;
  int patch = DehazeConfig{}.patch;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--mode", mode, "original | clahe | clahe_gamma | dcpd")->capture_default_str();
    cmd->add_option("--clip-limit", clip_limit, "CLAHE clip limit")->capture_default_str();
    cmd->add_option("--tiles", tiles, "CLAHE tile grid, NxN or N")->capture_default_str();
    cmd->add_option("--gamma", gamma, "gamma exponent")->capture_default_str();
    cmd->add_option("--omega", omega, "haze removal strength")->capture_default_str();
    cmd->add_option("--t0", t0, "transmission floor")->capture_default_str();
    cmd->add_option("--patch", patch, "dark channel patch size")->capture_default_str();
  }

  EnhanceConfig config() const {
    EnhanceConfig cfg;
    const auto x = tiles.find_first_of("xX");
    std::size_t used = 0;
    try {
      if (x == std::string::npos) {
        cfg.clahe.tiles_x = cfg.clahe.tiles_y = std::stoi(tiles, &used);
        if (used != tiles.size()) throw std::invalid_argument("");
      } else {
        const std::string a = tiles.substr(0, x), b = tiles.substr(x + 1);
        std::size_t ua = 0, ub = 0;
        cfg.clahe.tiles_x = std::stoi(a, &ua);
        cfg.clahe.tiles_y = std::stoi(b, &ub);
        if (ua != a.size() || ub != b.size()) throw std::invalid_argument("");
      }
    } catch (const std::logic_error&) {
      throw std::invalid_argument("--tiles expects NxN, got '" + tiles + "'");
    }
    cfg.clahe.clip_limit = clip_limit;
    cfg.gamma.gamma = gamma;
    cfg.dehaze.omega = omega;
    cfg.dehaze.t0 = t0;
    cfg.dehaze.patch = patch;
    validate(cfg.clahe);
    validate(cfg.gamma);
    validate(cfg.dehaze);
    return cfg;
  }
};

Split parse_split(const std::string& s) {
  if (s == "all") return Split::unassigned;
  if (s == "train") return Split::train;
  if (s == "val") return Split::val;
  if (s == "test") return Split::test;
  throw std::invalid_argument("unknown split '" + s + "' (expected all, train, val or test)");
}

void print_summary(const RunResult& r) {
  const DatasetMetrics& m = r.dataset_metrics;
  std::cout << r.label << ": images=" << m.image_count << " mIoU=" << format_fixed(m.miou, 4)
            << " Dice=" << format_fixed(m.dice, 4) << " HD=" << format_fixed(m.hd_mean, 2)
            << " MAD=" << format_fixed(m.mad_mean, 2) << " mAP50=" << format_fixed(r.ap.ap50, 4)
            << " mAP50-95=" << format_fixed(r.ap.ap50_95, 4) << " bestF1=" << format_fixed(r.best_f1.f1, 4)
            << "@" << format_fixed(r.best_f1.threshold, 3) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pipeline segmentation evaluation toolkit"};
  app.require_subcommand(1);

  // prepare
  auto* prepare = app.add_subcommand("prepare", "ingest a labelled image folder and split it 60/20/20");
  std::string prep_src, prep_out, prep_created_at;
  int prep_quality = 95, prep_workers = 1;
  bool prep_no_split = false;
  prepare->add_option("src", prep_src, "source directory")->required();
  prepare->add_option("out", prep_out, "output dataset directory")->required();
  prepare->add_option("--jpeg-quality", prep_quality, "quality for re-encoded images")->capture_default_str();
  prepare->add_option("--workers", prep_workers, "worker threads, 0 = all cores")->capture_default_str();
  prepare->add_option("--created-at", prep_created_at, "fixed manifest timestamp");
  prepare->add_flag("--no-split", prep_no_split, "leave the split unassigned");

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check a manifest against its files");
  std::string val_manifest;
  validate_cmd->add_option("manifest", val_manifest, "manifest.json")->required();

  // enhance
  auto* enhance_cmd = app.add_subcommand("enhance", "write enhanced copies of the manifest images");
  std::string enh_manifest, enh_out, enh_split = "all";
  int enh_workers = 1;
  EnhanceFlags enh_flags;
  enhance_cmd->add_option("manifest", enh_manifest, "manifest.json")->required();
  enh_flags.add_to(enhance_cmd);
  enhance_cmd->add_option("--out", enh_out, "output directory (default: <dataset>/enhanced_<mode>)");
  enhance_cmd->add_option("--split", enh_split, "all | train | val | test")->capture_default_str();
  enhance_cmd->add_option("--workers", enh_workers, "worker threads, 0 = all cores")->capture_default_str();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "score predictions on the test split");
  RunConfig ev;
  std::string ev_manifest, ev_preds, ev_out = "evaluation";
  EnhanceFlags ev_flags;
  evaluate->add_option("manifest", ev_manifest, "manifest.json")->required();
  evaluate->add_option("pred_dir", ev_preds, "directory of <image_id>.json prediction files")->required();
  evaluate->add_option("--threshold", ev.confidence_threshold, "confidence threshold")->capture_default_str();
  evaluate->add_option("--iou", ev.iou_threshold, "IoU threshold for the F1 curve")->capture_default_str();
  evaluate->add_option("--step", ev.curve_step, "confidence sweep step")->capture_default_str();
  evaluate->add_option("--out", ev_out, "output directory")->capture_default_str();
  evaluate->add_option("--model", ev.model, "model name (default: prediction directory name)");
  evaluate->add_option("--label", ev.label, "run label");
  evaluate->add_option("--class", ev.class_id, "class id to evaluate")->capture_default_str();
  evaluate->add_option("--workers", ev.workers, "worker threads, 0 = all cores")->capture_default_str();
  ev_flags.add_to(evaluate);

  // curves
  auto* curves = app.add_subcommand("curves", "F1/precision/recall over the confidence threshold");
  RunConfig cv;
  std::string cv_manifest, cv_preds, cv_out;
  curves->add_option("manifest", cv_manifest, "manifest.json")->required();
  curves->add_option("pred_dir", cv_preds, "directory of <image_id>.json prediction files")->required();
  curves->add_option("--step", cv.curve_step, "confidence sweep step")->capture_default_str();
  curves->add_option("--iou", cv.iou_threshold, "IoU threshold")->capture_default_str();
  curves->add_option("--class", cv.class_id, "class id to evaluate")->capture_default_str();
  curves->add_option("--out", cv_out, "write curve.csv here instead of stdout");
  curves->add_option("--workers", cv.workers, "worker threads, 0 = all cores")->capture_default_str();

  // report
  auto* report = app.add_subcommand("report", "render result.json files as a comparison table");
  std::vector<std::string> rep_inputs;
  std::string rep_style = "table2", rep_format = "markdown";
  bool rep_sort = false;
  report->add_option("results", rep_inputs, "result.json files")->required();
  report->add_option("--style", rep_style, "table2 | table3")->capture_default_str();
  report->add_option("--format", rep_format, "markdown | csv | latex")->capture_default_str();
  report->add_flag("--sort", rep_sort, "order rows by label");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*prepare) {
      IngestOptions opts;
      opts.jpeg_quality = prep_quality;
      opts.workers = prep_workers;
      opts.created_at = prep_created_at;
      IngestResult res = ingest(prep_src, prep_out, opts);
      for (const auto& name : res.report.missing_label) std::cerr << "warning: no label for " << name << "\n";
      for (const auto& [name, why] : res.report.undecodable) std::cerr << "warning: skipped " << name << ": " << why << "\n";
      DatasetManifest m = res.manifest;
      if (!prep_no_split) {
        m = split_manifest(m);
        write_manifest(m, std::filesystem::path(prep_out) / kManifestFileName);
      }
      const auto sizes = prep_no_split ? SplitSizes{} : split_sizes(m.entries.size());
      std::cout << "ingested " << res.report.ingested << " images";
      if (!prep_no_split) std::cout << " (train " << sizes.train << ", val " << sizes.val << ", test " << sizes.test << ")";
      std::cout << "\n";
    } else if (*validate_cmd) {
      const ValidationReport r = validate_manifest(read_manifest(val_manifest));
      std::cout << validation_report_to_json(r);
      return r.ok() ? 0 : kExitData;
    } else if (*enhance_cmd) {
      const EnhanceMode mode = parse_enhance_mode(enh_flags.mode);
      const EnhanceConfig cfg = enh_flags.config();
      std::filesystem::path out = enh_out;
      if (out.empty()) out = std::filesystem::path(enh_manifest).parent_path() / ("enhanced_" + std::string(to_string(mode)));
      const auto n = run_enhance(enh_manifest, mode, cfg, out, enh_workers, parse_split(enh_split));
      std::cout << "enhanced " << n << " images into " << out.string() << "\n";
    } else if (*evaluate) {
      ev.manifest_path = ev_manifest;
      ev.predictions_dir = ev_preds;
      ev.output_dir = ev_out;
      ev.enhancement_mode = parse_enhance_mode(ev_flags.mode);
      ev.enhance = ev_flags.config();
      const EvaluationOutput out = run_evaluate(ev);
      print_summary(out.result);
    } else if (*curves) {
      cv.manifest_path = cv_manifest;
      cv.predictions_dir = cv_preds;
      cv.output_dir = cv_out;
      const ConfidenceCurve curve = run_curves(cv);
      const std::string best = "best F1 " + format_fixed(curve.best.f1, 4) + " at threshold " +
                               format_fixed(curve.best.threshold, 3) + "\n";
      if (cv_out.empty()) {
        std::cout << curve_to_csv(curve);
        std::cerr << best;
      } else {
        std::cout << best;
      }
    } else if (*report) {
      const TableStyle style = parse_table_style(rep_style);
      if (rep_format != "markdown" && rep_format != "csv" && rep_format != "latex") {
        throw std::invalid_argument("unknown format '" + rep_format + "' (expected markdown, csv or latex)");
      }
      std::vector<RunResult> results;
      for (const auto& p : rep_inputs) results.push_back(read_run_result(p));
      const RenderedTable t = render_table(results, style, rep_sort);
      std::cout << (rep_format == "csv" ? t.csv : rep_format == "latex" ? t.latex : t.markdown);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
