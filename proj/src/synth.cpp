#include "foi/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "foi/detector.hpp"

namespace foi {

void SynthConfig::validate() const {
  if (width < 1 || height < 1) throw ParameterError("synthetic slide dimensions must be >= 1");
  if (!(microns_per_pixel > 0.0)) throw ParameterError("synthetic microns_per_pixel must be > 0");
  if (!(tissue_fill >= 0.0 && tissue_fill <= 1.0)) throw ParameterError("tissue_fill must lie in [0, 1]");
  if (!(relabel_fraction >= 0.0 && relabel_fraction <= 1.0)) throw ParameterError("relabel_fraction must lie in [0, 1]");
  if (!(cluster_intensity >= 0.0) || !(offspring_mean >= 0.0) || !(cluster_sigma_um >= 0.0)) {
    throw ParameterError("cluster parameters must be >= 0");
  }
}

namespace {

// Smooth value noise on a lattice with the given spacing (pixels).
class ValueNoise {
 public:
  ValueNoise(std::uint64_t seed, double spacing) : seed_(seed), spacing_(spacing) {}

  double operator()(double x, double y) const {
    const double gx = x / spacing_;
    const double gy = y / spacing_;
    const auto ix = static_cast<std::int64_t>(std::floor(gx));
    const auto iy = static_cast<std::int64_t>(std::floor(gy));
    const double fx = smooth(gx - static_cast<double>(ix));
    const double fy = smooth(gy - static_cast<double>(iy));
    const double a = node(ix, iy);
    const double b = node(ix + 1, iy);
    const double c = node(ix, iy + 1);
    const double d = node(ix + 1, iy + 1);
    return (a + (b - a) * fx) * (1.0 - fy) + (c + (d - c) * fx) * fy;
  }

 private:
  static double smooth(double t) { return t * t * (3.0 - 2.0 * t); }
  double node(std::int64_t ix, std::int64_t iy) const {
    return static_cast<double>(derive_seed(seed_, ix, iy) >> 11) * 0x1.0p-53 * 2.0 - 1.0;
  }

  std::uint64_t seed_;
  double spacing_;
};

constexpr int kFieldStep = 8;

}  // namespace

SynthTissue gen_tissue(const SynthConfig& cfg) {
  cfg.validate();
  const int w = cfg.width;
  const int h = cfg.height;
  const double mpp = cfg.microns_per_pixel;
  SynthTissue out{RgbImage{GrayPlane(w, h, mpp), GrayPlane(w, h, mpp), GrayPlane(w, h, mpp)}, BinaryMask(w, h, mpp, 0)};

  // Tissue score: a centered elliptical bump perturbed by two octaves of
  // value noise. Thresholding at the (1 - fill) quantile gives the region.
  const double extent = std::max(w, h);
  const ValueNoise coarse(derive_seed(cfg.seed, 11, 0), extent / 5.0);
  const ValueNoise fine(derive_seed(cfg.seed, 12, 0), extent / 14.0);
  const int fw = w / kFieldStep + 2;
  const int fh = h / kFieldStep + 2;
  std::vector<double> field(static_cast<std::size_t>(fw) * fh);
  for (int j = 0; j < fh; ++j) {
    for (int i = 0; i < fw; ++i) {
      const double x = i * kFieldStep;
      const double y = j * kFieldStep;
      const double dx = (x - 0.5 * w) / (0.5 * w);
      const double dy = (y - 0.5 * h) / (0.5 * h);
      field[static_cast<std::size_t>(j) * fw + i] =
          -std::sqrt(dx * dx + dy * dy) + 0.35 * coarse(x, y) + 0.15 * fine(x, y);
    }
  }
  auto score = [&](int x, int y) {
    const double gx = static_cast<double>(x) / kFieldStep;
    const double gy = static_cast<double>(y) / kFieldStep;
    const int i = static_cast<int>(gx);
    const int j = static_cast<int>(gy);
    const double fx = gx - i;
    const double fy = gy - j;
    const auto at = [&](int a, int b) { return field[static_cast<std::size_t>(b) * fw + a]; };
    return (at(i, j) + (at(i + 1, j) - at(i, j)) * fx) * (1.0 - fy) +
           (at(i, j + 1) + (at(i + 1, j + 1) - at(i, j + 1)) * fx) * fy;
  };

  double threshold = 0.0;
  bool none = cfg.tissue_fill <= 0.0;
  bool all = cfg.tissue_fill >= 1.0;
  if (!none && !all) {
    std::vector<double> sample;
    sample.reserve(static_cast<std::size_t>(w / 4 + 1) * static_cast<std::size_t>(h / 4 + 1));
    for (int y = 0; y < h; y += 4) {
      for (int x = 0; x < w; x += 4) sample.push_back(score(x, y));
    }
    const auto k = static_cast<std::size_t>(std::floor((1.0 - cfg.tissue_fill) * static_cast<double>(sample.size())));
    std::nth_element(sample.begin(), sample.begin() + static_cast<std::ptrdiff_t>(std::min(k, sample.size() - 1)),
                     sample.end());
    threshold = sample[std::min(k, sample.size() - 1)];
  }

  const std::uint64_t pixel_seed = derive_seed(cfg.seed, 13, 0);
  for (int y = 0; y < h; ++y) {
    auto r = out.rgb.r.row(y);
    auto g = out.rgb.g.row(y);
    auto b = out.rgb.b.row(y);
    auto m = out.tissue.row(y);
    for (int x = 0; x < w; ++x) {
      const bool tissue = all || (!none && score(x, y) >= threshold);
      const std::uint64_t bits = mix64(pixel_seed + static_cast<std::uint64_t>(y) * static_cast<std::uint64_t>(w) +
                                       static_cast<std::uint64_t>(x));
      const int n1 = static_cast<int>(bits & 0x1f);
      const int n2 = static_cast<int>((bits >> 8) & 0x1f);
      const int n3 = static_cast<int>((bits >> 16) & 0x1f);
      const auto ux = static_cast<std::size_t>(x);
      if (tissue) {
        // Eosin-pink stroma, each channel within [120, 200].
        r[ux] = static_cast<std::uint8_t>(165 + n1);
        g[ux] = static_cast<std::uint8_t>(125 + n2);
        b[ux] = static_cast<std::uint8_t>(160 + n3);
        m[ux] = 1;
      } else {
        r[ux] = static_cast<std::uint8_t>(232 + (n1 >> 1));
        g[ux] = static_cast<std::uint8_t>(232 + (n2 >> 1));
        b[ux] = static_cast<std::uint8_t>(232 + (n3 >> 1));
      }
    }
  }
  return out;
}

AnnotationSet gen_mitoses(const SynthConfig& cfg, const BinaryMask& tissue) {
  cfg.validate();
  if (tissue.width() != cfg.width || tissue.height() != cfg.height) {
    throw DimensionError("tissue mask does not match the synthetic slide dimensions");
  }
  AnnotationSet set;
  set.slide_id = cfg.slide_id;
  set.microns_per_pixel = cfg.microns_per_pixel;
  set.width = cfg.width;
  set.height = cfg.height;

  std::int64_t tissue_px = 0;
  for (std::uint8_t v : tissue.values()) tissue_px += v ? 1 : 0;
  const double px_mm2 = cfg.microns_per_pixel * cfg.microns_per_pixel * 1e-6;
  const double tissue_mm2 = static_cast<double>(tissue_px) * px_mm2;
  if (tissue_px == 0 || cfg.cluster_intensity <= 0.0) return set;

  std::mt19937_64 rng(derive_seed(cfg.seed, 21, 0));
  std::poisson_distribution<int> parents(cfg.cluster_intensity * tissue_mm2);
  std::uniform_real_distribution<double> ux(0.0, static_cast<double>(cfg.width));
  std::uniform_real_distribution<double> uy(0.0, static_cast<double>(cfg.height));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double sigma_px = cfg.cluster_sigma_um / cfg.microns_per_pixel;
  std::normal_distribution<double> displacement(0.0, 1.0);

  const int n_parents = parents(rng);
  for (int p = 0; p < n_parents; ++p) {
    double px = 0.0;
    double py = 0.0;
    do {
      px = ux(rng);
      py = uy(rng);
    } while (!tissue(std::min(cfg.width - 1, static_cast<int>(px)), std::min(cfg.height - 1, static_cast<int>(py))));

    std::poisson_distribution<int> offspring(cfg.offspring_mean);
    const int n = cfg.offspring_mean > 0.0 ? offspring(rng) : 0;
    for (int k = 0; k < n; ++k) {
      const double fx = px + sigma_px * displacement(rng);
      const double fy = py + sigma_px * displacement(rng);
      const double relabel = unit(rng);
      const double which = unit(rng);
      const auto ix = static_cast<long long>(std::floor(fx));
      const auto iy = static_cast<long long>(std::floor(fy));
      if (ix < 0 || iy < 0 || ix >= cfg.width || iy >= cfg.height) continue;
      if (!tissue(static_cast<int>(ix), static_cast<int>(iy))) continue;
      Annotation a{static_cast<int>(ix), static_cast<int>(iy), CellClass::mitosis, true, true};
      if (relabel < cfg.relabel_fraction) {
        if (which < 0.5) {
          a.cell_class = CellClass::mitosis_like;
          a.expert2_mitosis = false;
        } else {
          a.expert2_mitosis = false;
        }
      }
      set.annotations.push_back(a);
    }
  }
  return set;
}

}  // namespace foi
