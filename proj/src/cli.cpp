#include "foi/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "foi/raster_io.hpp"

namespace foi::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void log(const std::string& msg) { std::cerr << "[foi] " << msg << '\n'; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void require_path(const fs::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string("config key '") + what + "' is required for this command");
  if (!fs::exists(p)) throw MissingInputError("no such file: " + p.string());
}

struct LoadedSlide {
  std::string slide_id;
  double mpp = 0.0;
  std::optional<AnnotationSet> annotations;
  std::optional<RgbImage> rgb;
  int width = 0;
  int height = 0;
};

double resolve_mpp(const RunConfig& config, const std::optional<AnnotationSet>& ann) {
  if (config.microns_per_pixel > 0.0) return config.microns_per_pixel;
  if (ann) return ann->microns_per_pixel;
  throw ConfigError("slide pixel pitch unknown: set 'microns_per_pixel' or provide 'annotations'");
}

LoadedSlide load_slide(const RunConfig& config, const SlidePaths& paths, bool need_raster, bool need_annotations) {
  LoadedSlide s;
  if (need_annotations) require_path(paths.annotations, "annotations");
  if (!paths.annotations.empty()) s.annotations = load_annotations(paths.annotations);
  s.mpp = resolve_mpp(config, s.annotations);
  if (need_raster) {
    require_path(paths.slide, "slide");
    s.rgb = io::read_rgb(paths.slide, s.mpp);
    s.width = s.rgb->width();
    s.height = s.rgb->height();
    if (s.annotations && (s.annotations->width != s.width || s.annotations->height != s.height)) {
      throw ValidationError("annotation header dims " + std::to_string(s.annotations->width) + "x" +
                            std::to_string(s.annotations->height) + " differ from slide raster " +
                            std::to_string(s.width) + "x" + std::to_string(s.height));
    }
  } else {
    s.width = s.annotations->width;
    s.height = s.annotations->height;
  }
  s.slide_id = s.annotations ? s.annotations->slide_id : paths.slide.stem().string();
  return s;
}

std::vector<Point> consensus_of(const LoadedSlide& s) {
  return s.annotations ? consensus_mitoses(*s.annotations) : std::vector<Point>{};
}

}  // namespace

void cmd_synth(const RunConfig& config) {
  prepare_out_dir(config.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const SynthTissue tissue = gen_tissue(config.synth);
  const AnnotationSet set = gen_mitoses(config.synth, tissue.tissue);
  const fs::path raster = config.out_dir / ("slide." + config.synth_format);
  io::write_image(raster, tissue.rgb);
  save_annotations(config.out_dir / "annotations.json", set);
  GrayPlane reference(tissue.tissue.width(), tissue.tissue.height(), tissue.tissue.microns_per_pixel());
  auto src = tissue.tissue.values();
  auto dst = reference.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] ? 255 : 0;
  io::write_pgm(config.out_dir / "tissue_reference.pgm", reference);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  log("synth: " + std::to_string(set.annotations.size()) + " annotations on a " + std::to_string(config.synth.width) +
      "x" + std::to_string(config.synth.height) + " slide (" + std::to_string(ms) + " ms) -> " + raster.string());
}

void cmd_mask(const RunConfig& config) {
  const LoadedSlide s = load_slide(config, config.input, true, false);
  prepare_out_dir(config.out_dir);
  const ValidMaskResult mask = compute_valid_mask(*s.rgb, config.pipeline);
  GrayPlane image(mask.valid.width(), mask.valid.height(), mask.valid.microns_per_pixel());
  auto src = mask.valid.values();
  auto dst = image.values();
  std::size_t valid = 0;
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = src[i] ? 255 : 0;
    valid += src[i] ? 1 : 0;
  }
  io::write_pgm(config.out_dir / "valid_mask.pgm", image);
  const json sidecar = {{"otsu_threshold", mask.otsu_threshold},
                        {"effective_threshold", mask.effective_threshold},
                        {"coverage_threshold", config.pipeline.tissue.coverage_threshold},
                        {"se_radius", config.pipeline.tissue.se_radius},
                        {"downsample_factor", config.pipeline.mask_downsample},
                        {"microns_per_pixel", mask.valid.microns_per_pixel()},
                        {"valid_positions", valid}};
  write_text(config.out_dir / "valid_mask.json", sidecar.dump(2) + "\n");
  log("mask: otsu=" + std::to_string(mask.otsu_threshold) + ", " + std::to_string(valid) + " valid positions");
}

void cmd_detect(const RunConfig& config) {
  const bool needs_points = config.detector.kind != DetectorKind::external;
  const LoadedSlide s = load_slide(config, config.input, !needs_points, needs_points);
  prepare_out_dir(config.out_dir);
  const auto detector = make_detector(config.detector, consensus_of(s), s.mpp, config.seed);
  const SegMap map = detect_slide(*detector, s.width, s.height, s.mpp, config.pipeline.tiling);
  io::write_foim(config.out_dir / "segmap.foim", map);
  log("detect: " + detector->name() + " map " + std::to_string(map.width()) + "x" + std::to_string(map.height()));
}

void cmd_propose(const RunConfig& config) {
  const LoadedSlide s = load_slide(config, config.input, true, config.detector.kind != DetectorKind::external);
  prepare_out_dir(config.out_dir);
  const auto points = consensus_of(s);
  const auto detector = make_detector(config.detector, points, s.mpp, config.seed);
  const SlideRun run =
      run_slide(*s.rgb, *detector, config.detector.disc_radius_px, config.pipeline, s.annotations ? &points : nullptr);
  const Rect& r = run.proposal.rect;
  const json doc = {
      {"slide_id", s.slide_id},
      {"rect", {{"x", r.x}, {"y", r.y}, {"w", r.w}, {"h", r.h}}},
      {"estimated_mc", run.proposal.estimated_mc},
      {"gt_mc", run.proposal.gt_mc ? json(*run.proposal.gt_mc) : json(nullptr)},
      {"window",
       {{"area_mm2", config.pipeline.window.area_mm2}, {"w_px", run.window_full.w}, {"h_px", run.window_full.h}}},
      {"detector", run.detector_name}};
  write_text(config.out_dir / "proposal.json", doc.dump(2) + "\n");
  log("propose: rect (" + std::to_string(r.x) + ", " + std::to_string(r.y) + ", " + std::to_string(r.w) + ", " +
      std::to_string(r.h) + "), estimated MC " + std::to_string(run.proposal.estimated_mc));
}

void cmd_evaluate(const RunConfig& config) {
  std::vector<SlideReport> reports;
  for (const SlidePaths& paths : config.slides()) {
    const LoadedSlide s = load_slide(config, paths, true, true);
    const auto points = consensus_of(s);
    const auto detector = make_detector(config.detector, points, s.mpp, config.seed);
    const SlideRun run = run_slide(*s.rgb, *detector, config.detector.disc_radius_px, config.pipeline, &points);
    reports.push_back(evaluate_run(run, points, s.slide_id, s.width, s.height, config.pipeline));
    const auto& rep = reports.back();
    log("evaluate: " + s.slide_id + " r=" + (rep.pearson_r ? std::to_string(*rep.pearson_r) : "undefined") +
        " proposal MC " + std::to_string(rep.proposal_gt_mc) + " (rank " + std::to_string(rep.proposal_rank) + ")");
  }
  const auto pooled = emit_report(reports, config.out_dir);
  log("evaluate: pooled r=" + (pooled ? std::to_string(*pooled) : std::string("undefined")));
}

int run(int argc, char** argv) {
  CLI::App app{"Field-of-interest proposal for mitotic counting on whole-slide images", "foi"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  int threads = 0;
  app.add_option("--config", config_path, "Run-config JSON file");
  app.add_option("--set", overrides, "Override a config key: --set pipeline.grid_stride=128")->take_all();
  app.add_option("--out", out_dir, "Output directory (overrides out_dir)");
  app.add_option("--threads", threads, "Worker threads for tile processing")->check(CLI::PositiveNumber);

  using Command = void (*)(const RunConfig&);
  const std::vector<std::tuple<const char*, const char*, Command>> commands = {
      {"synth", "Generate a synthetic slide and its annotations", cmd_synth},
      {"mask", "Compute the valid-tissue mask", cmd_mask},
      {"detect", "Run the detector tile-wise and stitch its map", cmd_detect},
      {"propose", "Propose the field of interest", cmd_propose},
      {"evaluate", "Evaluate proposals and correlation against ground truth", cmd_evaluate},
  };
  Command selected = nullptr;
  for (const auto& [name, help, fn] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->callback([&selected, f = fn] { selected = f; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    RunConfig config = load_config(config_path, overrides);
    if (!out_dir.empty()) config.out_dir = out_dir;
    if (threads > 0) config.pipeline.tiling.threads = threads;
    selected(config);
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "foi: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MissingInputError& e) {
    std::cerr << "foi: missing input: " << e.what() << '\n';
    return kExitMissingInput;
  } catch (const std::exception& e) {
    std::cerr << "foi: " << e.what() << '\n';
    return kExitPipeline;
  }
}

}  // namespace foi::cli
