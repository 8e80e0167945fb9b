#include "foi/detector.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <random>

#include "foi/parallel.hpp"
#include "foi/raster_io.hpp"

namespace foi {

void DetectorSpec::validate() const {
  if (!(disc_radius_px >= 1.0)) throw ParameterError("detector disc radius must be >= 1 px");
  if (output_scale != 1 && output_scale != 16) throw ParameterError("detector output_scale must be 1 or 16");
  if (!(noise.miss_prob >= 0.0 && noise.miss_prob <= 1.0)) throw ParameterError("miss_prob must lie in [0, 1]");
  if (!(noise.fp_rate_per_mm2 >= 0.0)) throw ParameterError("fp_rate_per_mm2 must be >= 0");
  if (!(noise.gain > 0.0)) throw ParameterError("gain must be > 0");
  if (kind == DetectorKind::external && tile_dir.empty()) throw ParameterError("external detector needs a tile_dir");
}

std::string to_string(DetectorKind kind) {
  switch (kind) {
    case DetectorKind::oracle:
      return "oracle";
    case DetectorKind::noisy:
      return "noisy";
    case DetectorKind::external:
      return "external";
  }
  return "oracle";
}

std::uint64_t mix64(std::uint64_t v) {
  v += 0x9e3779b97f4a7c15ull;
  v = (v ^ (v >> 30)) * 0xbf58476d1ce4e5b9ull;
  v = (v ^ (v >> 27)) * 0x94d049bb133111ebull;
  return v ^ (v >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::int64_t a, std::int64_t b) {
  return mix64(mix64(seed ^ mix64(static_cast<std::uint64_t>(a))) ^ static_cast<std::uint64_t>(b));
}

namespace {

void draw_discs_fullres(SegMap& map, const Rect& tile, const std::vector<Point>& points, double radius) {
  const double r2 = radius * radius;
  const int reach = static_cast<int>(std::floor(radius));
  for (const Point& p : points) {
    const int x0 = std::max(tile.x, p.x - reach);
    const int x1 = std::min(tile.right() - 1, p.x + reach);
    const int y0 = std::max(tile.y, p.y - reach);
    const int y1 = std::min(tile.bottom() - 1, p.y + reach);
    for (int y = y0; y <= y1; ++y) {
      const double dy = y - p.y;
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - p.x;
        if (dx * dx + dy * dy <= r2) map(x - tile.x, y - tile.y) = 1.0f;
      }
    }
  }
}

SegMap render(const Rect& tile, const std::vector<Point>& points, const DetectorSpec& spec, double mpp) {
  const int s = spec.output_scale;
  if (s == 1) {
    SegMap map(tile.w, tile.h, mpp, 0.0f);
    draw_discs_fullres(map, tile, points, spec.disc_radius_px);
    return map;
  }
  std::vector<PointF> local;
  const double reach = spec.disc_radius_px + 1.0;
  for (const Point& p : points) {
    const double x = p.x + 0.5 - tile.x;
    const double y = p.y + 0.5 - tile.y;
    if (x < -reach || y < -reach || x > tile.w + reach || y > tile.h + reach) continue;
    local.push_back({x, y});
  }
  return rasterize_coarse(local, tile.w, tile.h, s, spec.disc_radius_px / s, mpp * s);
}

std::vector<Point> points_near(const Rect& tile, const std::vector<Point>& points, double radius) {
  const int reach = static_cast<int>(std::ceil(radius)) + 1;
  std::vector<Point> out;
  for (const Point& p : points) {
    if (p.x >= tile.x - reach && p.x < tile.right() + reach && p.y >= tile.y - reach && p.y < tile.bottom() + reach) {
      out.push_back(p);
    }
  }
  return out;
}

}  // namespace

SegMap oracle_detect(const Rect& tile, const std::vector<Point>& points, const DetectorSpec& spec,
                     double microns_per_pixel) {
  spec.validate();
  return render(tile, points_near(tile, points, spec.disc_radius_px), spec, microns_per_pixel);
}

std::vector<Point> sample_false_positives(const Rect& tile, const DetectorSpec& spec, double microns_per_pixel,
                                          std::uint64_t seed) {
  std::vector<Point> out;
  if (spec.noise.fp_rate_per_mm2 <= 0.0) return out;
  const double area_mm2 = static_cast<double>(tile.w) * tile.h * microns_per_pixel * microns_per_pixel * 1e-6;
  std::mt19937_64 rng(derive_seed(seed, tile.x, tile.y));
  std::poisson_distribution<int> count(spec.noise.fp_rate_per_mm2 * area_mm2);
  std::uniform_int_distribution<int> ux(tile.x, tile.right() - 1);
  std::uniform_int_distribution<int> uy(tile.y, tile.bottom() - 1);
  const int n = count(rng);
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const int x = ux(rng);
    out.push_back({x, uy(rng)});
  }
  return out;
}

SegMap noisy_detect(const Rect& tile, const std::vector<Point>& points, const DetectorSpec& spec,
                    double microns_per_pixel, std::uint64_t seed) {
  spec.validate();
  std::vector<Point> shown;
  const std::uint64_t miss_seed = mix64(seed ^ 0x6d6973735f736565ull);
  for (const Point& p : points_near(tile, points, spec.disc_radius_px)) {
    const double u = static_cast<double>(derive_seed(miss_seed, p.x, p.y) >> 11) * 0x1.0p-53;
    if (u >= spec.noise.miss_prob) shown.push_back(p);
  }
  const auto fps = sample_false_positives(tile, spec, microns_per_pixel, seed);
  shown.insert(shown.end(), fps.begin(), fps.end());
  SegMap map = render(tile, shown, spec, microns_per_pixel);
  const float gain = static_cast<float>(spec.noise.gain);
  for (float& v : map.values()) v = std::clamp(v * gain, 0.0f, 1.0f);
  return map;
}

SegMap rasterize_coarse(const std::vector<PointF>& points, int tile_w, int tile_h, int factor, double radius_coarse,
                        double microns_per_pixel) {
  if (factor < 1 || tile_w < factor || tile_h < factor || tile_w % factor != 0 || tile_h % factor != 0) {
    throw ParameterError("rasterize_coarse: factor must divide the tile size");
  }
  if (!(radius_coarse > 0.0)) throw ParameterError("rasterize_coarse: radius must be > 0");
  constexpr int kShift = 8;  // 1/256 coarse pixel
  constexpr int kOne = 1 << kShift;
  constexpr int kSub = 16;  // samples per axis per output pixel
  constexpr int kStep = kOne / kSub;
  const int cw = tile_w / factor;
  const int ch = tile_h / factor;
  std::vector<std::bitset<kSub * kSub>> hits(static_cast<std::size_t>(cw) * ch);
  const long long r_fixed = round_half_up(radius_coarse * kOne);
  const long long r2 = r_fixed * r_fixed;
  for (const PointF& p : points) {
    const long long cx = round_half_up(p.x / factor * kOne);
    const long long cy = round_half_up(p.y / factor * kOne);
    const int px0 = std::max(0, static_cast<int>(std::floor(static_cast<double>(cx - r_fixed) / kOne)));
    const int px1 = std::min(cw - 1, static_cast<int>(std::floor(static_cast<double>(cx + r_fixed) / kOne)));
    const int py0 = std::max(0, static_cast<int>(std::floor(static_cast<double>(cy - r_fixed) / kOne)));
    const int py1 = std::min(ch - 1, static_cast<int>(std::floor(static_cast<double>(cy + r_fixed) / kOne)));
    for (int py = py0; py <= py1; ++py) {
      for (int px = px0; px <= px1; ++px) {
        auto& cell = hits[static_cast<std::size_t>(py) * cw + px];
        for (int sy = 0; sy < kSub; ++sy) {
          const long long dy = static_cast<long long>(py) * kOne + sy * kStep + kStep / 2 - cy;
          for (int sx = 0; sx < kSub; ++sx) {
            const long long dx = static_cast<long long>(px) * kOne + sx * kStep + kStep / 2 - cx;
            if (dx * dx + dy * dy <= r2) cell.set(static_cast<std::size_t>(sy * kSub + sx));
          }
        }
      }
    }
  }
  SegMap out(cw, ch, microns_per_pixel, 0.0f);
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] = static_cast<float>(hits[i].count()) / static_cast<float>(kSub * kSub);
  }
  return out;
}

double iou(const SegMap& a, const SegMap& b) {
  if (!a.same_shape(b)) throw DimensionError("iou: maps differ in dimensions");
  double inter = 0.0;
  double uni = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t i = 0; i < av.size(); ++i) {
    const double x = av[i];
    const double y = bv[i];
    inter += x * y;
    uni += x + y - x * y;
  }
  if (uni == 0.0) return 1.0;
  return inter / uni;
}

namespace {

class OracleDetector final : public Detector {
 public:
  OracleDetector(DetectorSpec spec, std::vector<Point> points, double mpp)
      : spec_(std::move(spec)), points_(std::move(points)), mpp_(mpp) {}
  int output_scale() const override { return spec_.output_scale; }
  std::string name() const override { return "oracle"; }
  SegMap detect(const Rect& tile) const override { return oracle_detect(tile, points_, spec_, mpp_); }

 private:
  DetectorSpec spec_;
  std::vector<Point> points_;
  double mpp_;
};

class NoisyDetector final : public Detector {
 public:
  NoisyDetector(DetectorSpec spec, std::vector<Point> points, double mpp, std::uint64_t seed)
      : spec_(std::move(spec)), points_(std::move(points)), mpp_(mpp), seed_(seed) {}
  int output_scale() const override { return spec_.output_scale; }
  std::string name() const override { return "noisy"; }
  SegMap detect(const Rect& tile) const override { return noisy_detect(tile, points_, spec_, mpp_, seed_); }

 private:
  DetectorSpec spec_;
  std::vector<Point> points_;
  double mpp_;
  std::uint64_t seed_;
};

class ExternalDetector final : public Detector {
 public:
  ExternalDetector(DetectorSpec spec, double mpp) : spec_(std::move(spec)), mpp_(mpp) {}
  int output_scale() const override { return spec_.output_scale; }
  std::string name() const override { return "external"; }
  SegMap detect(const Rect& tile) const override {
    const auto path = spec_.tile_dir / external_tile_name(tile);
    Plane<float> map = io::read_foim(path);
    const int s = spec_.output_scale;
    if (map.width() != tile.w / s || map.height() != tile.h / s) {
      throw DimensionError(path.string() + " is " + std::to_string(map.width()) + "x" + std::to_string(map.height()) +
                           ", expected " + std::to_string(tile.w / s) + "x" + std::to_string(tile.h / s));
    }
    // Pixel pitch comes from the slide, not from the tile header.
    std::vector<float> values(map.values().begin(), map.values().end());
    return SegMap(map.width(), map.height(), mpp_ * s, std::move(values));
  }

 private:
  DetectorSpec spec_;
  double mpp_;
};

}  // namespace

std::unique_ptr<Detector> make_detector(const DetectorSpec& spec, std::vector<Point> points, double microns_per_pixel,
                                        std::uint64_t seed) {
  spec.validate();
  switch (spec.kind) {
    case DetectorKind::oracle:
      return std::make_unique<OracleDetector>(spec, std::move(points), microns_per_pixel);
    case DetectorKind::noisy:
      return std::make_unique<NoisyDetector>(spec, std::move(points), microns_per_pixel, seed);
    case DetectorKind::external:
      return std::make_unique<ExternalDetector>(spec, microns_per_pixel);
  }
  throw ParameterError("unknown detector kind");
}

std::string external_tile_name(const Rect& tile) {
  return "tile_" + std::to_string(tile.x) + "_" + std::to_string(tile.y) + ".foim";
}

SegMap detect_slide(const Detector& detector, int slide_width, int slide_height, double microns_per_pixel,
                    const TilingParams& tiling) {
  const int s = detector.output_scale();
  if (tiling.tile_size % s != 0 || tiling.margin % s != 0) {
    throw ParameterError("tile_size and margin must be multiples of the detector output scale");
  }
  const int cw = (slide_width + s - 1) / s;
  const int ch = (slide_height + s - 1) / s;
  const TileGrid grid = make_tile_grid(cw, ch, tiling.tile_size / s, tiling.margin / s);
  Stitcher stitcher(grid, microns_per_pixel * s);
  parallel_for(grid.tile_count(), tiling.threads, [&](std::size_t i) {
    const Rect r = grid.tile_rect(i);
    const Rect full{r.x * s, r.y * s, r.w * s, r.h * s};
    stitcher.add(i, detector.detect(full));
  });
  return std::move(stitcher).finish();
}

}  // namespace foi
