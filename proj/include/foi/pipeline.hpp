#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "foi/annotations.hpp"
#include "foi/density.hpp"
#include "foi/detector.hpp"
#include "foi/eval.hpp"
#include "foi/raster.hpp"
#include "foi/tissue_mask.hpp"
#include "foi/window.hpp"

namespace foi {

struct PipelineParams {
  TilingParams tiling;
  int mask_downsample = 32;
  /// Working resolution of the density map relative to full resolution.
  int density_downsample = 16;
  FoiWindow window;
  TissueParams tissue;
  int grid_stride = 256;

  void validate() const;
};

/// Grayscale, downsample, Otsu, closing and windowed coverage.
ValidMaskResult compute_valid_mask(const RgbImage& slide, const PipelineParams& params);

/// Moves a detector map (at its output scale) to the working resolution and
/// converts window mass to counts.
DensityMap estimate_density(const SegMap& seg_map, int output_scale, double disc_radius_full,
                            const PipelineParams& params);

/// Valid mask resampled onto the density grid.
BinaryMask valid_on_density_grid(const BinaryMask& valid_lowres, const DensityMap& density,
                                 const PipelineParams& params);

/// Evaluation grid aligned with density pixels: every (grid_stride /
/// density_downsample)-th density position whose estimate is defined and whose
/// full-resolution window fits on the slide.
struct AlignedGrid {
  EvalGrid grid;  // full-resolution centers
  int map_x0 = 0;
  int map_y0 = 0;
  int map_stride = 1;
};

AlignedGrid aligned_eval_grid(const DensityMap& density, int slide_width, int slide_height,
                              const PipelineParams& params);

struct SlideRun {
  ValidMaskResult mask;
  SegMap seg_map;
  DensityMap density;
  BinaryMask valid;  // on the density grid
  FoiProposal proposal;
  std::string detector_name;
  WindowDims window_full;
};

/// Both paths of the pipeline plus the masked argmax. When `consensus` is
/// given the proposal carries its ground-truth count.
SlideRun run_slide(const RgbImage& slide, const Detector& detector, double disc_radius_full,
                   const PipelineParams& params, const std::vector<Point>* consensus = nullptr);

/// Samples the run's density and valid maps on the aligned grid, computes the
/// ground-truth map and builds the slide report.
SlideReport evaluate_run(const SlideRun& run, const std::vector<Point>& consensus, const std::string& slide_id,
                         int slide_width, int slide_height, const PipelineParams& params);

}  // namespace foi
