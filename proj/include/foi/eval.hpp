#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "foi/annotations.hpp"
#include "foi/density.hpp"

namespace foi {

/// Product-moment correlation. Throws UndefinedCorrelationError for fewer
/// than two samples or a constant series.
double pearson(std::span<const double> x, std::span<const double> y);

struct Quantiles {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
};

/// Inclusive linear interpolation (position p * (n - 1)).
Quantiles quantiles(std::span<const double> values);

/// Empirical CDF at `proposal_value`: fraction of values <= it.
double proposal_rank(double proposal_value, std::span<const double> distribution);

struct ScatterPoint {
  int grid_x = 0;
  int grid_y = 0;
  std::int32_t gt_mc = 0;
  double est_mc = 0.0;
};

struct SlideReport {
  std::string slide_id;
  std::optional<double> pearson_r;
  std::string pearson_error;  // set when pearson_r is empty
  Quantiles mc_quantiles;
  std::int64_t proposal_gt_mc = 0;
  double proposal_estimated_mc = 0.0;
  double proposal_rank = 0.0;
  std::int64_t n_positions = 0;
  std::vector<ScatterPoint> scatter;
};

/// `est_map`, `gt_map` and `valid` share the evaluation grid. Positions with
/// valid == 0 or an undefined estimate are skipped. A constant series leaves
/// pearson_r empty and records the reason instead of throwing.
SlideReport evaluate_slide(const std::string& slide_id, const DensityMap& est_map, const McMap& gt_map,
                           const BinaryMask& valid, const FoiProposal& proposal);

/// Writes report.json and scatter.csv into `out_dir` and returns the pooled
/// correlation over all slides' scatter points.
std::optional<double> emit_report(const std::vector<SlideReport>& reports, const std::filesystem::path& out_dir);

std::string report_json(const std::vector<SlideReport>& reports, std::optional<double> pooled);
std::string scatter_csv(const std::vector<SlideReport>& reports);
std::optional<double> pooled_pearson(const std::vector<SlideReport>& reports);

}  // namespace foi
