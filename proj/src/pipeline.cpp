#include "foi/pipeline.hpp"

#include <string>

namespace foi {

void PipelineParams::validate() const {
  if (tiling.tile_size <= 2 * tiling.margin || tiling.margin < 0) {
    throw ParameterError("tile_size must exceed 2*margin");
  }
  if (tiling.threads < 1) throw ParameterError("threads must be >= 1");
  if (mask_downsample < 1 || density_downsample < 1) throw ParameterError("downsample factors must be >= 1");
  if (grid_stride < 1) throw ParameterError("grid_stride must be >= 1");
  if (grid_stride % density_downsample != 0) {
    throw ParameterError("grid_stride must be a multiple of density_downsample");
  }
  if (!(window.area_mm2 > 0.0) || window.aspect_w < 1 || window.aspect_h < 1) {
    throw ParameterError("window area and aspect must be positive");
  }
  if (!(tissue.coverage_threshold >= 0.0 && tissue.coverage_threshold <= 1.0)) {
    throw ParameterError("coverage_threshold must lie in [0, 1]");
  }
  if (tissue.se_radius < 1) throw ParameterError("se_radius must be >= 1");
}

ValidMaskResult compute_valid_mask(const RgbImage& slide, const PipelineParams& params) {
  const GrayPlane low = downsample(to_grayscale(slide), params.mask_downsample);
  return valid_mask(low, params.window, params.tissue);
}

DensityMap estimate_density(const SegMap& seg_map, int output_scale, double disc_radius_full,
                            const PipelineParams& params) {
  if (params.density_downsample % output_scale != 0) {
    throw ParameterError("density_downsample must be a multiple of the detector output scale");
  }
  const SegMap work = downsample(seg_map, params.density_downsample / output_scale);
  const WindowDims dims = foi_window_dims(work.microns_per_pixel(), params.window);
  return estimate_mc_map(work, dims, disc_radius_full / params.density_downsample);
}

BinaryMask valid_on_density_grid(const BinaryMask& valid_lowres, const DensityMap& density,
                                 const PipelineParams& params) {
  return align_mask(valid_lowres, params.mask_downsample, params.density_downsample, density.width(),
                    density.height(), density.microns_per_pixel());
}

AlignedGrid aligned_eval_grid(const DensityMap& density, int slide_width, int slide_height,
                              const PipelineParams& params) {
  const int f = params.density_downsample;
  const double full_mpp = density.microns_per_pixel() / f;
  const WindowDims work = foi_window_dims(density.microns_per_pixel(), params.window);
  const WindowDims full = foi_window_dims(full_mpp, params.window);

  // Density positions usable on one axis: estimate defined and full window on the slide.
  auto usable = [&](int extent_map, int extent_full, int work_size, int full_size) {
    std::vector<int> out;
    for (int v = work_size / 2; v <= extent_map - work_size + work_size / 2; ++v) {
      const int lo = map_to_full(v, f) - full_size / 2;
      if (lo >= 0 && lo + full_size <= extent_full) out.push_back(v);
    }
    return out;
  };
  const auto xs = usable(density.width(), slide_width, work.w, full.w);
  const auto ys = usable(density.height(), slide_height, work.h, full.h);
  if (xs.empty() || ys.empty()) throw GeometryError("field of interest does not fit on the slide");

  AlignedGrid g;
  g.map_stride = params.grid_stride / f;
  g.map_x0 = xs.front();
  g.map_y0 = ys.front();
  g.grid.window = full;
  g.grid.stride = params.grid_stride;
  g.grid.x0 = map_to_full(g.map_x0, f);
  g.grid.y0 = map_to_full(g.map_y0, f);
  g.grid.nx = (xs.back() - xs.front()) / g.map_stride + 1;
  g.grid.ny = (ys.back() - ys.front()) / g.map_stride + 1;
  return g;
}

SlideRun run_slide(const RgbImage& slide, const Detector& detector, double disc_radius_full,
                   const PipelineParams& params, const std::vector<Point>* consensus) {
  params.validate();
  SlideRun run;
  run.detector_name = detector.name();
  run.mask = compute_valid_mask(slide, params);
  run.seg_map = detect_slide(detector, slide.width(), slide.height(), slide.microns_per_pixel(), params.tiling);
  run.density = estimate_density(run.seg_map, detector.output_scale(), disc_radius_full, params);
  run.valid = valid_on_density_grid(run.mask.valid, run.density, params);
  run.window_full = foi_window_dims(slide.microns_per_pixel(), params.window);
  ProposalGeometry geometry{params.density_downsample, slide.width(), slide.height(), run.window_full};
  run.proposal = propose_foi(run.density, run.valid, geometry);
  if (consensus) run.proposal.gt_mc = count_in_rect(*consensus, run.proposal.rect);
  return run;
}

SlideReport evaluate_run(const SlideRun& run, const std::vector<Point>& consensus, const std::string& slide_id,
                         int slide_width, int slide_height, const PipelineParams& params) {
  const AlignedGrid ag = aligned_eval_grid(run.density, slide_width, slide_height, params);
  const double full_mpp = run.density.microns_per_pixel() / params.density_downsample;
  const McMap gt = gt_mc_map(consensus, ag.grid, full_mpp);
  DensityMap est(ag.grid.nx, ag.grid.ny, gt.microns_per_pixel());
  BinaryMask valid(ag.grid.nx, ag.grid.ny, gt.microns_per_pixel());
  for (int j = 0; j < ag.grid.ny; ++j) {
    for (int i = 0; i < ag.grid.nx; ++i) {
      const int mx = ag.map_x0 + i * ag.map_stride;
      const int my = ag.map_y0 + j * ag.map_stride;
      est(i, j) = run.density(mx, my);
      valid(i, j) = run.valid(mx, my);
    }
  }
  FoiProposal proposal = run.proposal;
  if (!proposal.gt_mc) proposal.gt_mc = count_in_rect(consensus, proposal.rect);
  return evaluate_slide(slide_id, est, gt, valid, proposal);
}

}  // namespace foi
