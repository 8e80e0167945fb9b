#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "foi/annotations.hpp"
#include "foi/raster.hpp"

namespace foi {

enum class DetectorKind { oracle, noisy, external };

struct NoiseSpec {
  double fp_rate_per_mm2 = 0.0;
  double miss_prob = 0.0;
  double gain = 1.0;
};

struct DetectorSpec {
  DetectorKind kind = DetectorKind::oracle;
  double disc_radius_px = 25.0;  // full resolution
  int output_scale = 1;          // 1: full resolution, 16: coarse
  NoiseSpec noise;
  std::filesystem::path tile_dir;  // external detector only

  /// Throws ParameterError on out-of-domain values.
  void validate() const;
};

std::string to_string(DetectorKind kind);

/// Sub-pixel point in tile-local full-resolution coordinates.
struct PointF {
  double x = 0.0;
  double y = 0.0;
};

/// splitmix64 finalizer; the seed combiner for per-tile and per-figure streams.
std::uint64_t mix64(std::uint64_t v);
std::uint64_t derive_seed(std::uint64_t seed, std::int64_t a, std::int64_t b);

/// Disc of 1.0 around every point within reach of `tile`, clipped at the tile
/// border. Full resolution uses pixel-center distances; output_scale 16 uses
/// rasterize_coarse.
SegMap oracle_detect(const Rect& tile, const std::vector<Point>& points, const DetectorSpec& spec,
                     double microns_per_pixel);

/// Spurious figure centers for one tile: Poisson count with mean
/// fp_rate * tile area, uniform positions, drawn from a tile-derived stream.
std::vector<Point> sample_false_positives(const Rect& tile, const DetectorSpec& spec, double microns_per_pixel,
                                          std::uint64_t seed);

/// Oracle output with each true figure dropped with miss_prob (decided per
/// figure, so overlapping tiles agree), spurious discs added, values scaled by
/// gain and clamped to [0, 1].
SegMap noisy_detect(const Rect& tile, const std::vector<Point>& points, const DetectorSpec& spec,
                    double microns_per_pixel, std::uint64_t seed);

/// Antialiased discs on a (tile_w/factor) x (tile_h/factor) grid. Centers are
/// quantised to 1/256 coarse pixel and coverage is sampled on a 16x16 lattice
/// inside each output pixel.
SegMap rasterize_coarse(const std::vector<PointF>& points, int tile_w, int tile_h, int factor, double radius_coarse,
                        double microns_per_pixel = 1.0);

/// Soft IoU: sum(a*b) / sum(a + b - a*b); 1 when both maps are all zero.
double iou(const SegMap& a, const SegMap& b);

/// Per-tile mitosis segmentation. Implementations must be pure functions of
/// the tile rectangle so tiles can run in any order.
class Detector {
 public:
  virtual ~Detector() = default;
  virtual int output_scale() const = 0;
  virtual std::string name() const = 0;
  /// `tile` is in full-resolution pixels; the result has tile dims / output_scale.
  virtual SegMap detect(const Rect& tile) const = 0;
};

/// Builds the detector described by `spec`. `points` are the consensus figures
/// (ignored by the external detector).
std::unique_ptr<Detector> make_detector(const DetectorSpec& spec, std::vector<Point> points,
                                        double microns_per_pixel, std::uint64_t seed);

/// Name of the per-tile file the external detector reads.
std::string external_tile_name(const Rect& tile);

struct TilingParams {
  int tile_size = 512;
  int margin = 64;
  int threads = 1;
};

/// Tiles the slide at the detector's output scale, runs the detector per tile
/// and stitches the result. At scale s the grid uses tile_size/s and margin/s
/// on the ceil(dims/s) plane.
SegMap detect_slide(const Detector& detector, int slide_width, int slide_height, double microns_per_pixel,
                    const TilingParams& tiling);

}  // namespace foi
