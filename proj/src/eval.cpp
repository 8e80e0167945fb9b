#include "foi/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace foi {

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("pearson: series differ in length");
  if (x.size() < 2) throw UndefinedCorrelationError("correlation needs at least two samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedCorrelationError("correlation is undefined for a constant series");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

Quantiles quantiles(std::span<const double> values) {
  if (values.empty()) throw ParameterError("quantiles of an empty series");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  auto at = [&](double p) {
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
  };
  return Quantiles{v.front(), at(0.25), at(0.5), at(0.75), v.back()};
}

double proposal_rank(double proposal_value, std::span<const double> distribution) {
  if (distribution.empty()) throw ParameterError("proposal rank against an empty distribution");
  const auto below = std::count_if(distribution.begin(), distribution.end(),
                                   [&](double v) { return v <= proposal_value; });
  return static_cast<double>(below) / static_cast<double>(distribution.size());
}

SlideReport evaluate_slide(const std::string& slide_id, const DensityMap& est_map, const McMap& gt_map,
                           const BinaryMask& valid, const FoiProposal& proposal) {
  if (!est_map.same_shape(gt_map) || !est_map.same_shape(valid)) {
    throw DimensionError("evaluate_slide: estimate, ground truth and valid mask differ in dimensions");
  }
  if (!proposal.gt_mc) throw ParameterError("evaluate_slide: proposal carries no ground-truth count");
  SlideReport report;
  report.slide_id = slide_id;
  std::vector<double> est;
  std::vector<double> gt;
  for (int y = 0; y < gt_map.height(); ++y) {
    for (int x = 0; x < gt_map.width(); ++x) {
      if (!valid(x, y) || !is_defined(est_map(x, y))) continue;
      est.push_back(est_map(x, y));
      gt.push_back(gt_map(x, y));
      report.scatter.push_back({x, y, gt_map(x, y), est_map(x, y)});
    }
  }
  if (gt.empty()) throw EmptyValidMaskError("evaluate_slide: no valid positions on the evaluation grid");
  report.n_positions = static_cast<std::int64_t>(gt.size());
  report.mc_quantiles = quantiles(gt);
  report.proposal_gt_mc = *proposal.gt_mc;
  report.proposal_estimated_mc = proposal.estimated_mc;
  report.proposal_rank = proposal_rank(static_cast<double>(*proposal.gt_mc), gt);
  try {
    report.pearson_r = pearson(est, gt);
  } catch (const UndefinedCorrelationError& e) {
    report.pearson_error = e.what();
  }
  return report;
}

std::optional<double> pooled_pearson(const std::vector<SlideReport>& reports) {
  std::vector<double> est;
  std::vector<double> gt;
  for (const auto& r : reports) {
    for (const auto& p : r.scatter) {
      est.push_back(p.est_mc);
      gt.push_back(p.gt_mc);
    }
  }
  try {
    return pearson(est, gt);
  } catch (const UndefinedCorrelationError&) {
    return std::nullopt;
  }
}

std::string report_json(const std::vector<SlideReport>& reports, std::optional<double> pooled) {
  using nlohmann::json;
  json slides = json::array();
  for (const auto& r : reports) {
    json s = {{"slide_id", r.slide_id},
              {"pearson_r", r.pearson_r ? json(*r.pearson_r) : json(nullptr)},
              {"mc_quantiles",
               {{"min", r.mc_quantiles.min},
                {"q1", r.mc_quantiles.q1},
                {"median", r.mc_quantiles.median},
                {"q3", r.mc_quantiles.q3},
                {"max", r.mc_quantiles.max}}},
              {"proposal_gt_mc", r.proposal_gt_mc},
              {"proposal_estimated_mc", r.proposal_estimated_mc},
              {"proposal_rank", r.proposal_rank},
              {"n_positions", r.n_positions}};
    if (!r.pearson_r) s["pearson_error"] = r.pearson_error;
    slides.push_back(std::move(s));
  }
  json doc = {{"slides", std::move(slides)}, {"pooled_pearson", pooled ? json(*pooled) : json(nullptr)}};
  return doc.dump(2) + "\n";
}

std::string scatter_csv(const std::vector<SlideReport>& reports) {
  std::string out = "slide_id,grid_x,grid_y,gt_mc,est_mc\n";
  char buf[64];
  for (const auto& r : reports) {
    for (const auto& p : r.scatter) {
      std::snprintf(buf, sizeof(buf), "%.17g", p.est_mc);
      out += r.slide_id + "," + std::to_string(p.grid_x) + "," + std::to_string(p.grid_y) + "," +
             std::to_string(p.gt_mc) + "," + buf + "\n";
    }
  }
  return out;
}

std::optional<double> emit_report(const std::vector<SlideReport>& reports, const std::filesystem::path& out_dir) {
  if (reports.empty()) throw ParameterError("emit_report: no slide reports");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const auto pooled = pooled_pearson(reports);
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
  };
  write(out_dir / "report.json", report_json(reports, pooled));
  write(out_dir / "scatter.csv", scatter_csv(reports));
  return pooled;
}

}  // namespace foi
