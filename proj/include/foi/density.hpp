#pragma once

#include <cmath>
#include <limits>
#include <optional>

#include "foi/raster.hpp"
#include "foi/window.hpp"

namespace foi {

/// Estimated mitotic count of the window centered at each position. Positions
/// whose window leaves the plane hold NaN ("undefined").
using DensityMap = Plane<double>;

inline constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
inline bool is_defined(double v) { return !std::isnan(v); }

/// Window sum (moving average without the 1/(w*h) factor) via a summed-area table.
template <typename T>
DensityMap box_sum(const Plane<T>& map, WindowDims window);

extern template DensityMap box_sum(const Plane<float>&, WindowDims);
extern template DensityMap box_sum(const Plane<double>&, WindowDims);
extern template DensityMap box_sum(const Plane<std::uint8_t>&, WindowDims);
extern template DensityMap box_sum(const Plane<std::int32_t>&, WindowDims);

/// Window mass of the segmentation map divided by the mass of one figure disc,
/// pi * disc_radius^2 (both in the map's own pixels).
DensityMap estimate_mc_map(const SegMap& seg_map, WindowDims window, double disc_radius);

/// Nearest-neighbour resampling of a mask computed at `src_factor` onto a grid
/// at `dst_factor` (factors relative to full resolution), sampling the mask at
/// each destination pixel's full-resolution center.
BinaryMask align_mask(const BinaryMask& mask, int src_factor, int dst_factor, int dst_width, int dst_height,
                      double dst_microns_per_pixel);

struct FoiProposal {
  Rect rect;  // full-resolution pixels
  double estimated_mc = 0.0;
  std::optional<std::int64_t> gt_mc;
  /// Argmax position in density-map pixels.
  int map_x = 0;
  int map_y = 0;
};

/// How density-map pixels relate to the slide.
struct ProposalGeometry {
  int scale = 1;  // full-resolution pixels per map pixel
  int slide_width = 0;
  int slide_height = 0;
  WindowDims window;  // full resolution
};

/// Full-resolution center of a map pixel.
inline int map_to_full(int v, int scale) { return v * scale + scale / 2; }

/// Masked argmax of `mc_map` (first in row-major order on ties), returned as a
/// full-resolution rectangle centered on that position and clamped into the slide.
/// Throws EmptyValidMaskError when no defined position is valid.
FoiProposal propose_foi(const DensityMap& mc_map, const BinaryMask& valid, const ProposalGeometry& geometry);

}  // namespace foi
