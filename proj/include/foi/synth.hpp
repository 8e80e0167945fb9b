#pragma once

#include <cstdint>
#include <string>

#include "foi/annotations.hpp"
#include "foi/raster.hpp"

namespace foi {

/// Synthetic slide with a clustered (Thomas process) mitosis population.
struct SynthConfig {
  int width = 8192;
  int height = 6144;
  double microns_per_pixel = 1.0;
  double tissue_fill = 0.6;
  double cluster_intensity = 1.5;  // parents per mm^2 of tissue
  double offspring_mean = 12.0;    // figures per cluster
  double cluster_sigma_um = 100.0;
  /// Fraction of generated figures relabelled as mitosis_like or single-expert.
  double relabel_fraction = 0.1;
  std::uint64_t seed = 1;
  std::string slide_id = "synthetic";

  void validate() const;
};

struct SynthTissue {
  RgbImage rgb;
  BinaryMask tissue;  // reference mask
};

/// Bright background (every channel >= 230) with one irregular dark tissue
/// region (channels in [120, 200]) covering about tissue_fill of the slide.
SynthTissue gen_tissue(const SynthConfig& cfg);

/// Cluster parents as a Poisson process over the tissue, Poisson(offspring_mean)
/// figures per parent with Gaussian displacement; figures landing off-slide or
/// off-tissue are dropped.
AnnotationSet gen_mitoses(const SynthConfig& cfg, const BinaryMask& tissue);

}  // namespace foi
