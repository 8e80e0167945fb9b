#include "foi/tissue_mask.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "foi/sat.hpp"

namespace foi {

using boost::multiprecision::int512_t;

Histogram histogram(const GrayPlane& gray) {
  Histogram h{};
  for (std::uint8_t v : gray.values()) ++h[v];
  return h;
}

int otsu_threshold(const Histogram& hist) {
  int512_t total = 0;
  int512_t total_sum = 0;
  int occupied = 0;
  int only = 0;
  for (int i = 0; i < 256; ++i) {
    total += hist[static_cast<std::size_t>(i)];
    total_sum += int512_t(hist[static_cast<std::size_t>(i)]) * i;
    if (hist[static_cast<std::size_t>(i)] > 0) {
      ++occupied;
      only = i;
    }
  }
  if (total == 0) throw ParameterError("otsu_threshold: histogram is empty");
  if (occupied == 1) return only;

  // sigma_B^2(t) = (N*S0 - n0*S)^2 / (N^2 * n0 * n1); N^2 is common to all t,
  // so candidates compare as fractions num/den with den = n0*n1.
  int512_t n0 = 0;
  int512_t s0 = 0;
  int512_t best_num = -1;
  int512_t best_den = 1;
  int best_t = 0;
  for (int t = 0; t < 256; ++t) {
    n0 += hist[static_cast<std::size_t>(t)];
    s0 += int512_t(hist[static_cast<std::size_t>(t)]) * t;
    const int512_t n1 = total - n0;
    int512_t num = 0;
    int512_t den = 1;
    if (n0 > 0 && n1 > 0) {
      const int512_t d = total * s0 - n0 * total_sum;
      num = d * d;
      den = n0 * n1;
    }
    if (num * best_den > best_num * den) {
      best_num = num;
      best_den = den;
      best_t = t;
    }
  }
  return best_t;
}

BinaryMask binarize_tissue(const GrayPlane& gray, int threshold) {
  BinaryMask out(gray.width(), gray.height(), gray.microns_per_pixel());
  auto src = gray.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<int>(src[i]) <= threshold ? 1 : 0;
  return out;
}

namespace {

// Counts of ones in the (2r+1) window along rows, then along columns.
// `outside` is the value assumed beyond the plane edge.
std::vector<int> separable_window_count(const BinaryMask& mask, int r, int outside) {
  const int w = mask.width();
  const int h = mask.height();
  std::vector<int> rows(static_cast<std::size_t>(w) * h);
  std::vector<int> prefix(static_cast<std::size_t>(std::max(w, h)) + 1);
  for (int y = 0; y < h; ++y) {
    auto src = mask.row(y);
    prefix[0] = 0;
    for (int x = 0; x < w; ++x) prefix[static_cast<std::size_t>(x) + 1] = prefix[static_cast<std::size_t>(x)] + src[static_cast<std::size_t>(x)];
    for (int x = 0; x < w; ++x) {
      const int lo = x - r;
      const int hi = x + r + 1;
      const int clo = std::max(lo, 0);
      const int chi = std::min(hi, w);
      const int pad = (clo - lo) + (hi - chi);
      rows[static_cast<std::size_t>(y) * w + x] = prefix[static_cast<std::size_t>(chi)] - prefix[static_cast<std::size_t>(clo)] + pad * outside;
    }
  }
  const int row_full = 2 * r + 1;
  std::vector<int> out(rows.size());
  for (int x = 0; x < w; ++x) {
    prefix[0] = 0;
    for (int y = 0; y < h; ++y) prefix[static_cast<std::size_t>(y) + 1] = prefix[static_cast<std::size_t>(y)] + rows[static_cast<std::size_t>(y) * w + x];
    for (int y = 0; y < h; ++y) {
      const int lo = y - r;
      const int hi = y + r + 1;
      const int clo = std::max(lo, 0);
      const int chi = std::min(hi, h);
      const int pad = (clo - lo) + (hi - chi);
      out[static_cast<std::size_t>(y) * w + x] = prefix[static_cast<std::size_t>(chi)] - prefix[static_cast<std::size_t>(clo)] + pad * row_full * outside;
    }
  }
  return out;
}

void check_radius(int se_radius) {
  if (se_radius < 1) throw ParameterError("structuring element radius must be >= 1, got " + std::to_string(se_radius));
}

}  // namespace

BinaryMask binary_dilate(const BinaryMask& mask, int se_radius) {
  check_radius(se_radius);
  const auto counts = separable_window_count(mask, se_radius, 0);
  BinaryMask out(mask.width(), mask.height(), mask.microns_per_pixel());
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = counts[i] > 0 ? 1 : 0;
  return out;
}

BinaryMask binary_erode(const BinaryMask& mask, int se_radius) {
  check_radius(se_radius);
  const auto counts = separable_window_count(mask, se_radius, 1);
  const int full = (2 * se_radius + 1) * (2 * se_radius + 1);
  BinaryMask out(mask.width(), mask.height(), mask.microns_per_pixel());
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = counts[i] == full ? 1 : 0;
  return out;
}

BinaryMask binary_close(const BinaryMask& mask, int se_radius) {
  return binary_erode(binary_dilate(mask, se_radius), se_radius);
}

BinaryMask coverage_mask(const BinaryMask& tissue, WindowDims window, double coverage_threshold) {
  if (window.w < 1 || window.h < 1) throw ParameterError("window dims must be >= 1");
  if (window.w > tissue.width() || window.h > tissue.height()) {
    throw GeometryError("coverage window " + std::to_string(window.w) + "x" + std::to_string(window.h) +
                        " exceeds the " + std::to_string(tissue.width()) + "x" + std::to_string(tissue.height()) +
                        " mask");
  }
  const SummedAreaTable<std::uint8_t> sat(tissue);
  const double area = static_cast<double>(window.w) * window.h;
  BinaryMask out(tissue.width(), tissue.height(), tissue.microns_per_pixel(), 0);
  for (int y = 0; y < tissue.height(); ++y) {
    for (int x = 0; x < tissue.width(); ++x) {
      const Rect r = centered_window(x, y, window);
      if (!fits(r, tissue.width(), tissue.height())) continue;
      const double coverage = static_cast<double>(sat.sum(r.x, r.y, r.w, r.h)) / area;
      out(x, y) = coverage >= coverage_threshold ? 1 : 0;
    }
  }
  return out;
}

ValidMaskResult valid_mask(const GrayPlane& gray_lowres, const FoiWindow& window, const TissueParams& params) {
  if (!(params.coverage_threshold >= 0.0 && params.coverage_threshold <= 1.0)) {
    throw ParameterError("coverage threshold must lie in [0, 1]");
  }
  ValidMaskResult result;
  result.otsu_threshold = otsu_threshold(histogram(gray_lowres));
  result.effective_threshold = std::min(result.otsu_threshold, params.max_tissue_intensity);
  result.tissue = binary_close(binarize_tissue(gray_lowres, result.effective_threshold), params.se_radius);
  const WindowDims dims = foi_window_dims(gray_lowres.microns_per_pixel(), window);
  result.valid = coverage_mask(result.tissue, dims, params.coverage_threshold);
  return result;
}

}  // namespace foi
