#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "foi/raster.hpp"
#include "foi/window.hpp"

namespace foi {

enum class CellClass { mitosis, mitosis_like, granulocyte, other };

std::string_view to_string(CellClass c);

struct Point {
  int x = 0;
  int y = 0;
  bool operator==(const Point&) const = default;
};

struct Annotation {
  int x = 0;
  int y = 0;
  CellClass cell_class = CellClass::mitosis;
  bool expert1_mitosis = false;
  bool expert2_mitosis = false;
  bool operator==(const Annotation&) const = default;
};

/// Point annotations of one slide in full-resolution pixel coordinates.
struct AnnotationSet {
  std::string slide_id;
  double microns_per_pixel = 0.25;
  int width = 0;
  int height = 0;
  std::vector<Annotation> annotations;
};

/// Throws ParseError (with line and field) on schema violations and
/// ValidationError (with the offending index) on out-of-bounds points.
AnnotationSet load_annotations(const std::filesystem::path& path);
AnnotationSet parse_annotations(std::string_view text, std::string_view source = "<memory>");
std::string serialize_annotations(const AnnotationSet& set);
void save_annotations(const std::filesystem::path& path, const AnnotationSet& set);

/// Annotations labelled mitosis by class and by both experts, in input order.
std::vector<Point> consensus_mitoses(const AnnotationSet& set);

/// Mitotic-count map: value at each grid position is the count of the window
/// centered there.
using McMap = Plane<std::int32_t>;

/// Window centers x0 + i*stride, y0 + j*stride in full-resolution pixels.
struct EvalGrid {
  int x0 = 0;
  int y0 = 0;
  int stride = 1;
  int nx = 0;
  int ny = 0;
  WindowDims window;

  Point center(int i, int j) const { return {x0 + i * stride, y0 + j * stride}; }
  Rect window_at(int i, int j) const {
    const Point c = center(i, j);
    return centered_window(c.x, c.y, window);
  }
};

/// Every center whose window lies fully inside a width x height slide,
/// starting at the first such center on each axis.
EvalGrid make_eval_grid(int width, int height, WindowDims window, int stride);

/// Counts points with window.x <= x < window.x + w (and likewise in y).
std::int64_t count_in_rect(const std::vector<Point>& points, const Rect& rect);

McMap gt_mc_map(const std::vector<Point>& points, const EvalGrid& grid, double microns_per_pixel);
McMap gt_mc_map(const std::vector<Point>& points, WindowDims window, int width, int height, double microns_per_pixel,
                int grid_stride = 256);

}  // namespace foi
