#include "foi/config.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

namespace foi {

using nlohmann::json;

std::vector<SlidePaths> RunConfig::slides() const {
  if (!batch.empty()) return batch;
  return {input};
}

namespace {

json defaults() {
  const RunConfig d;
  return json{
      {"slide", ""},
      {"annotations", ""},
      {"batch", json::array()},
      {"microns_per_pixel", d.microns_per_pixel},
      {"out_dir", d.out_dir.string()},
      {"seed", d.seed},
      {"pipeline",
       {{"tile_size", d.pipeline.tiling.tile_size},
        {"margin", d.pipeline.tiling.margin},
        {"threads", d.pipeline.tiling.threads},
        {"mask_downsample", d.pipeline.mask_downsample},
        {"density_downsample", d.pipeline.density_downsample},
        {"window_area_mm2", d.pipeline.window.area_mm2},
        {"window_aspect", {d.pipeline.window.aspect_w, d.pipeline.window.aspect_h}},
        {"coverage_threshold", d.pipeline.tissue.coverage_threshold},
        {"se_radius", d.pipeline.tissue.se_radius},
        {"max_tissue_intensity", d.pipeline.tissue.max_tissue_intensity},
        {"grid_stride", d.pipeline.grid_stride}}},
      {"detector",
       {{"kind", to_string(d.detector.kind)},
        {"disc_radius_px", d.detector.disc_radius_px},
        {"output_scale", d.detector.output_scale},
        {"noise",
         {{"fp_rate_per_mm2", d.detector.noise.fp_rate_per_mm2},
          {"miss_prob", d.detector.noise.miss_prob},
          {"gain", d.detector.noise.gain}}},
        {"tile_dir", ""}}},
      {"synth",
       {{"width", d.synth.width},
        {"height", d.synth.height},
        {"microns_per_pixel", d.synth.microns_per_pixel},
        {"tissue_fill", d.synth.tissue_fill},
        {"cluster_intensity", d.synth.cluster_intensity},
        {"offspring_mean", d.synth.offspring_mean},
        {"cluster_sigma_um", d.synth.cluster_sigma_um},
        {"relabel_fraction", d.synth.relabel_fraction},
        {"slide_id", d.synth.slide_id},
        {"format", d.synth_format}}},
  };
}

// Objects merge key by key; anything else replaces the default wholesale.
void merge(json& base, const json& patch, const std::string& path) {
  for (const auto& [key, value] : patch.items()) {
    const std::string where = path.empty() ? key : path + "." + key;
    auto it = base.find(key);
    if (it == base.end()) throw ConfigError("unknown config key '" + where + "'");
    if (it->is_object()) {
      if (!value.is_object()) throw ConfigError("config key '" + where + "' must be an object");
      merge(*it, value, where);
    } else {
      *it = value;
    }
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  // Build the nested patch for the dotted key and merge it like a file.
  json patch = value;
  std::string rest = key;
  std::vector<std::string> parts;
  for (std::size_t pos; (pos = rest.find('.')) != std::string::npos; rest = rest.substr(pos + 1)) {
    parts.push_back(rest.substr(0, pos));
  }
  parts.push_back(rest);
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) patch = json{{*it, patch}};
  merge(doc, patch, "");
}

template <typename T>
T get(const json& doc, const char* section, const char* key) {
  const json& v = section ? doc.at(section).at(key) : doc.at(key);
  const std::string where = section ? std::string(section) + "." + key : std::string(key);
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) throw ConfigError("config key '" + where + "' must be a boolean");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError("config key '" + where + "' must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0) {
        throw ConfigError("config key '" + where + "' must be non-negative");
      }
    }
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) throw ConfigError("config key '" + where + "' must be a number");
  } else {
    if (!v.is_string()) throw ConfigError("config key '" + where + "' must be a string");
  }
  return v.get<T>();
}

SlidePaths slide_paths(const json& v, const std::string& where) {
  if (!v.is_object()) throw ConfigError("'" + where + "' must be an object");
  SlidePaths p;
  for (const auto& [key, value] : v.items()) {
    if (!value.is_string()) throw ConfigError("'" + where + "." + key + "' must be a string");
    if (key == "slide") {
      p.slide = value.get<std::string>();
    } else if (key == "annotations") {
      p.annotations = value.get<std::string>();
    } else {
      throw ConfigError("unknown config key '" + where + "." + key + "'");
    }
  }
  return p;
}

RunConfig from_json(const json& doc) {
  RunConfig c;
  c.input.slide = get<std::string>(doc, nullptr, "slide");
  c.input.annotations = get<std::string>(doc, nullptr, "annotations");
  c.out_dir = get<std::string>(doc, nullptr, "out_dir");
  c.seed = get<std::uint64_t>(doc, nullptr, "seed");
  c.microns_per_pixel = get<double>(doc, nullptr, "microns_per_pixel");
  if (!(c.microns_per_pixel >= 0.0)) throw ConfigError("config key 'microns_per_pixel' must be >= 0");
  const json& batch = doc.at("batch");
  if (!batch.is_array()) throw ConfigError("config key 'batch' must be an array");
  for (std::size_t i = 0; i < batch.size(); ++i) c.batch.push_back(slide_paths(batch[i], "batch[" + std::to_string(i) + "]"));

  auto& p = c.pipeline;
  p.tiling.tile_size = get<int>(doc, "pipeline", "tile_size");
  p.tiling.margin = get<int>(doc, "pipeline", "margin");
  p.tiling.threads = get<int>(doc, "pipeline", "threads");
  p.mask_downsample = get<int>(doc, "pipeline", "mask_downsample");
  p.density_downsample = get<int>(doc, "pipeline", "density_downsample");
  p.window.area_mm2 = get<double>(doc, "pipeline", "window_area_mm2");
  const json& aspect = doc.at("pipeline").at("window_aspect");
  if (!aspect.is_array() || aspect.size() != 2 || !aspect[0].is_number_integer() || !aspect[1].is_number_integer()) {
    throw ConfigError("config key 'pipeline.window_aspect' must be [w, h] integers");
  }
  p.window.aspect_w = aspect[0].get<int>();
  p.window.aspect_h = aspect[1].get<int>();
  p.tissue.coverage_threshold = get<double>(doc, "pipeline", "coverage_threshold");
  p.tissue.se_radius = get<int>(doc, "pipeline", "se_radius");
  p.tissue.max_tissue_intensity = get<int>(doc, "pipeline", "max_tissue_intensity");
  p.grid_stride = get<int>(doc, "pipeline", "grid_stride");

  auto& d = c.detector;
  const auto kind = get<std::string>(doc, "detector", "kind");
  if (kind == "oracle") {
    d.kind = DetectorKind::oracle;
  } else if (kind == "noisy") {
    d.kind = DetectorKind::noisy;
  } else if (kind == "external") {
    d.kind = DetectorKind::external;
  } else {
    throw ConfigError("detector.kind must be oracle, noisy or external, got '" + kind + "'");
  }
  d.disc_radius_px = get<double>(doc, "detector", "disc_radius_px");
  d.output_scale = get<int>(doc, "detector", "output_scale");
  const json& noise = doc.at("detector").at("noise");
  d.noise.fp_rate_per_mm2 = get<double>(noise, nullptr, "fp_rate_per_mm2");
  d.noise.miss_prob = get<double>(noise, nullptr, "miss_prob");
  d.noise.gain = get<double>(noise, nullptr, "gain");
  d.tile_dir = get<std::string>(doc, "detector", "tile_dir");

  auto& s = c.synth;
  s.width = get<int>(doc, "synth", "width");
  s.height = get<int>(doc, "synth", "height");
  s.microns_per_pixel = get<double>(doc, "synth", "microns_per_pixel");
  s.tissue_fill = get<double>(doc, "synth", "tissue_fill");
  s.cluster_intensity = get<double>(doc, "synth", "cluster_intensity");
  s.offspring_mean = get<double>(doc, "synth", "offspring_mean");
  s.cluster_sigma_um = get<double>(doc, "synth", "cluster_sigma_um");
  s.relabel_fraction = get<double>(doc, "synth", "relabel_fraction");
  s.slide_id = get<std::string>(doc, "synth", "slide_id");
  s.seed = c.seed;
  c.synth_format = get<std::string>(doc, "synth", "format");
  if (c.synth_format != "ppm" && c.synth_format != "png") throw ConfigError("synth.format must be ppm or png");

  try {
    p.validate();
    d.validate();
    s.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  if (p.tissue.max_tissue_intensity < 0 || p.tissue.max_tissue_intensity > 255) {
    throw ConfigError("pipeline.max_tissue_intensity must lie in [0, 255]");
  }
  return c;
}

}  // namespace

std::string default_config_json() { return defaults().dump(2) + "\n"; }

RunConfig parse_config(const std::string& text, const std::vector<std::string>& overrides) {
  json doc = defaults();
  if (!text.empty()) {
    json user;
    try {
      user = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!user.is_object()) throw ConfigError("config top level must be an object");
    merge(doc, user, "");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return from_json(doc);
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  if (path.empty()) return parse_config("", overrides);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_config(text, overrides);
}

}  // namespace foi
