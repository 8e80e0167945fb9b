#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "foi/detector.hpp"
#include "foi/pipeline.hpp"
#include "foi/synth.hpp"

namespace foi {

struct SlidePaths {
  std::filesystem::path slide;
  std::filesystem::path annotations;
};

/// Everything a CLI run needs. Loaded from one JSON document; unknown keys are
/// rejected and every parameter is checked against its module's domain.
struct RunConfig {
  SlidePaths input;
  /// Extra slides for `evaluate`; when empty, `input` is the only slide.
  std::vector<SlidePaths> batch;
  /// Slide pixel pitch; 0 means "take it from the annotation file".
  double microns_per_pixel = 0.0;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 1;
  PipelineParams pipeline;
  DetectorSpec detector;
  SynthConfig synth;
  std::string synth_format = "ppm";

  /// Slides to evaluate: `batch` if set, otherwise `input`.
  std::vector<SlidePaths> slides() const;
};

/// Default configuration as JSON; doubles as the schema of accepted keys.
std::string default_config_json();

/// `overrides` are "dotted.key=value" strings; values parse as JSON when
/// possible and as plain strings otherwise. Throws ConfigError.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});
RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides = {});

}  // namespace foi
