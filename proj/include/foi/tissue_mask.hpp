#pragma once

#include <array>
#include <cstdint>

#include "foi/raster.hpp"
#include "foi/window.hpp"

namespace foi {

using Histogram = std::array<std::uint64_t, 256>;

Histogram histogram(const GrayPlane& gray);

/// Otsu's threshold: the t maximizing between-class variance of {<= t} and
/// {> t}, smallest t on ties. A single-intensity histogram yields that intensity.
/// Candidates are compared in exact integer arithmetic.
int otsu_threshold(const Histogram& hist);

/// 1 where intensity <= threshold (tissue absorbs light), else 0.
BinaryMask binarize_tissue(const GrayPlane& gray, int threshold);

/// Dilation then erosion with a (2r+1)^2 square. Outside the plane counts as
/// background for the dilation and as foreground for the erosion.
BinaryMask binary_dilate(const BinaryMask& mask, int se_radius);
BinaryMask binary_erode(const BinaryMask& mask, int se_radius);
BinaryMask binary_close(const BinaryMask& mask, int se_radius);

/// V(p) = 1 iff the window centered at p lies inside the plane and its mean
/// tissue coverage is >= coverage_threshold. `window` is in plane pixels.
BinaryMask coverage_mask(const BinaryMask& tissue, WindowDims window, double coverage_threshold);

struct TissueParams {
  double coverage_threshold = 0.95;
  int se_radius = 2;
  /// Pixels brighter than this are never tissue, whatever Otsu returns.
  int max_tissue_intensity = 220;
};

struct ValidMaskResult {
  BinaryMask valid;
  BinaryMask tissue;  // closed tissue mask
  int otsu_threshold = 0;
  int effective_threshold = 0;
};

/// Full low-resolution path: Otsu, binarize, close, windowed coverage test.
/// `window` is the physical field; it is converted with the plane's pitch.
ValidMaskResult valid_mask(const GrayPlane& gray_lowres, const FoiWindow& window, const TissueParams& params = {});

}  // namespace foi
