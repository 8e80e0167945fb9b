#include "foi/density.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "foi/sat.hpp"

namespace foi {

template <typename T>
DensityMap box_sum(const Plane<T>& map, WindowDims window) {
  if (window.w < 1 || window.h < 1) throw ParameterError("window dims must be >= 1");
  if (window.w > map.width() || window.h > map.height()) {
    throw GeometryError("window " + std::to_string(window.w) + "x" + std::to_string(window.h) + " exceeds the " +
                        std::to_string(map.width()) + "x" + std::to_string(map.height()) + " map");
  }
  const SummedAreaTable<T> sat(map);
  DensityMap out(map.width(), map.height(), map.microns_per_pixel(), kUndefined);
  // Defined centers: x - w/2 >= 0 and x - w/2 + w <= width.
  const int x_lo = window.w / 2;
  const int x_hi = map.width() - window.w + window.w / 2;
  const int y_lo = window.h / 2;
  const int y_hi = map.height() - window.h + window.h / 2;
  for (int y = y_lo; y <= y_hi; ++y) {
    auto dst = out.row(y);
    for (int x = x_lo; x <= x_hi; ++x) {
      dst[static_cast<std::size_t>(x)] = static_cast<double>(sat.sum(x - x_lo, y - y_lo, window.w, window.h));
    }
  }
  return out;
}

template DensityMap box_sum(const Plane<float>&, WindowDims);
template DensityMap box_sum(const Plane<double>&, WindowDims);
template DensityMap box_sum(const Plane<std::uint8_t>&, WindowDims);
template DensityMap box_sum(const Plane<std::int32_t>&, WindowDims);

DensityMap estimate_mc_map(const SegMap& seg_map, WindowDims window, double disc_radius) {
  if (!(disc_radius > 0.0)) throw ParameterError("disc radius must be > 0");
  DensityMap out = box_sum(seg_map, window);
  const double figure_mass = std::numbers::pi * disc_radius * disc_radius;
  for (double& v : out.values()) v /= figure_mass;  // NaN stays NaN
  return out;
}

BinaryMask align_mask(const BinaryMask& mask, int src_factor, int dst_factor, int dst_width, int dst_height,
                      double dst_microns_per_pixel) {
  if (src_factor < 1 || dst_factor < 1) throw ParameterError("resampling factors must be >= 1");
  BinaryMask out(dst_width, dst_height, dst_microns_per_pixel, 0);
  for (int y = 0; y < dst_height; ++y) {
    const int sy = std::min(mask.height() - 1, map_to_full(y, dst_factor) / src_factor);
    for (int x = 0; x < dst_width; ++x) {
      const int sx = std::min(mask.width() - 1, map_to_full(x, dst_factor) / src_factor);
      out(x, y) = mask(sx, sy);
    }
  }
  return out;
}

FoiProposal propose_foi(const DensityMap& mc_map, const BinaryMask& valid, const ProposalGeometry& geometry) {
  if (!mc_map.same_shape(valid)) throw DimensionError("density map and valid mask differ in dimensions");
  if (geometry.scale < 1) throw ParameterError("proposal scale must be >= 1");
  if (geometry.window.w > geometry.slide_width || geometry.window.h > geometry.slide_height) {
    throw GeometryError("field of interest does not fit on the slide");
  }
  bool found = false;
  double best = 0.0;
  int bx = 0;
  int by = 0;
  for (int y = 0; y < mc_map.height(); ++y) {
    auto m = mc_map.row(y);
    auto v = valid.row(y);
    for (int x = 0; x < mc_map.width(); ++x) {
      const double value = m[static_cast<std::size_t>(x)];
      if (!v[static_cast<std::size_t>(x)] || !is_defined(value)) continue;
      if (!found || value > best) {
        found = true;
        best = value;
        bx = x;
        by = y;
      }
    }
  }
  if (!found) throw EmptyValidMaskError();

  FoiProposal p;
  p.map_x = bx;
  p.map_y = by;
  p.estimated_mc = best;
  Rect r = centered_window(map_to_full(bx, geometry.scale), map_to_full(by, geometry.scale), geometry.window);
  r.x = std::clamp(r.x, 0, geometry.slide_width - r.w);
  r.y = std::clamp(r.y, 0, geometry.slide_height - r.h);
  p.rect = r;
  return p;
}

}  // namespace foi
