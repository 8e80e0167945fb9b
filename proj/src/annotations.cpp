#include "foi/annotations.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

namespace foi {

using nlohmann::json;

std::string_view to_string(CellClass c) {
  switch (c) {
    case CellClass::mitosis:
      return "mitosis";
    case CellClass::mitosis_like:
      return "mitosis_like";
    case CellClass::granulocyte:
      return "granulocyte";
    case CellClass::other:
      return "other";
  }
  return "other";
}

namespace {

int line_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

[[noreturn]] void field_error(std::string_view source, const std::string& field, const std::string& what) {
  throw ParseError(std::string(source) + ": field '" + field + "': " + what);
}

const json& require(const json& obj, const char* key, std::string_view source, const std::string& prefix) {
  auto it = obj.find(key);
  if (it == obj.end()) field_error(source, prefix + key, "missing");
  return *it;
}

int require_int(const json& obj, const char* key, std::string_view source, const std::string& prefix) {
  const json& v = require(obj, key, source, prefix);
  if (!v.is_number_integer()) field_error(source, prefix + key, "expected integer");
  const auto i = v.get<long long>();
  if (i < INT32_MIN || i > INT32_MAX) field_error(source, prefix + key, "integer out of range");
  return static_cast<int>(i);
}

bool require_bool(const json& obj, const char* key, std::string_view source, const std::string& prefix) {
  const json& v = require(obj, key, source, prefix);
  if (!v.is_boolean()) field_error(source, prefix + key, "expected boolean");
  return v.get<bool>();
}

CellClass parse_class(const std::string& s, std::string_view source, const std::string& field) {
  if (s == "mitosis") return CellClass::mitosis;
  if (s == "mitosis_like") return CellClass::mitosis_like;
  if (s == "granulocyte") return CellClass::granulocyte;
  if (s == "other") return CellClass::other;
  field_error(source, field, "unknown class '" + s + "'");
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, std::string_view source,
                const std::string& prefix) {
  for (const auto& [key, _] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      field_error(source, prefix + key, "unknown field");
    }
  }
}

}  // namespace

AnnotationSet parse_annotations(std::string_view text, std::string_view source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(source) + ":" + std::to_string(line_of(text, e.byte)) + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError(std::string(source) + ": top level must be an object");
  check_keys(doc, {"slide_id", "microns_per_pixel", "width", "height", "annotations"}, source, "");

  AnnotationSet set;
  const json& id = require(doc, "slide_id", source, "");
  if (!id.is_string()) field_error(source, "slide_id", "expected string");
  set.slide_id = id.get<std::string>();
  const json& mpp = require(doc, "microns_per_pixel", source, "");
  if (!mpp.is_number()) field_error(source, "microns_per_pixel", "expected number");
  set.microns_per_pixel = mpp.get<double>();
  if (!(set.microns_per_pixel > 0.0)) field_error(source, "microns_per_pixel", "must be > 0");
  set.width = require_int(doc, "width", source, "");
  set.height = require_int(doc, "height", source, "");
  if (set.width < 1) field_error(source, "width", "must be >= 1");
  if (set.height < 1) field_error(source, "height", "must be >= 1");

  const json& list = require(doc, "annotations", source, "");
  if (!list.is_array()) field_error(source, "annotations", "expected array");
  set.annotations.reserve(list.size());
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string prefix = "annotations[" + std::to_string(i) + "].";
    const json& item = list[i];
    if (!item.is_object()) field_error(source, prefix.substr(0, prefix.size() - 1), "expected object");
    check_keys(item, {"x", "y", "class", "expert1", "expert2"}, source, prefix);
    Annotation a;
    a.x = require_int(item, "x", source, prefix);
    a.y = require_int(item, "y", source, prefix);
    const json& cls = require(item, "class", source, prefix);
    if (!cls.is_string()) field_error(source, prefix + "class", "expected string");
    a.cell_class = parse_class(cls.get<std::string>(), source, prefix + "class");
    a.expert1_mitosis = require_bool(item, "expert1", source, prefix);
    a.expert2_mitosis = require_bool(item, "expert2", source, prefix);
    if (a.x < 0 || a.x >= set.width || a.y < 0 || a.y >= set.height) {
      throw ValidationError(std::string(source) + ": annotation " + std::to_string(i) + " at (" + std::to_string(a.x) +
                            ", " + std::to_string(a.y) + ") lies outside the " + std::to_string(set.width) + "x" +
                            std::to_string(set.height) + " slide");
    }
    if (a.cell_class == CellClass::mitosis_like && a.expert1_mitosis && a.expert2_mitosis) {
      throw ValidationError(std::string(source) + ": annotation " + std::to_string(i) +
                            " is mitosis_like but both experts marked it as mitosis");
    }
    set.annotations.push_back(a);
  }
  return set;
}

AnnotationSet load_annotations(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw MissingInputError("no such file: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_annotations(text, path.string());
}

std::string serialize_annotations(const AnnotationSet& set) {
  json list = json::array();
  for (const auto& a : set.annotations) {
    list.push_back({{"x", a.x},
                    {"y", a.y},
                    {"class", std::string(to_string(a.cell_class))},
                    {"expert1", a.expert1_mitosis},
                    {"expert2", a.expert2_mitosis}});
  }
  json doc = {{"slide_id", set.slide_id},
              {"microns_per_pixel", set.microns_per_pixel},
              {"width", set.width},
              {"height", set.height},
              {"annotations", std::move(list)}};
  return doc.dump(1) + "\n";
}

void save_annotations(const std::filesystem::path& path, const AnnotationSet& set) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << serialize_annotations(set);
  if (!out) throw IoError("write failed: " + path.string());
}

std::vector<Point> consensus_mitoses(const AnnotationSet& set) {
  std::vector<Point> out;
  for (const auto& a : set.annotations) {
    if (a.cell_class == CellClass::mitosis && a.expert1_mitosis && a.expert2_mitosis) out.push_back({a.x, a.y});
  }
  return out;
}

EvalGrid make_eval_grid(int width, int height, WindowDims window, int stride) {
  if (stride < 1) throw ParameterError("grid stride must be >= 1");
  if (window.w < 1 || window.h < 1) throw ParameterError("window dims must be >= 1");
  if (window.w > width || window.h > height) {
    throw GeometryError("window " + std::to_string(window.w) + "x" + std::to_string(window.h) +
                        " does not fit a " + std::to_string(width) + "x" + std::to_string(height) + " slide");
  }
  EvalGrid g;
  g.window = window;
  g.stride = stride;
  g.x0 = window.w / 2;
  g.y0 = window.h / 2;
  g.nx = (width - window.w) / stride + 1;
  g.ny = (height - window.h) / stride + 1;
  return g;
}

std::int64_t count_in_rect(const std::vector<Point>& points, const Rect& rect) {
  return std::count_if(points.begin(), points.end(), [&](const Point& p) { return rect.contains(p.x, p.y); });
}

namespace {

// Sorted distinct window edges along one axis; cell k spans [edges[k], edges[k+1]).
std::vector<int> window_edges(int first_lo, int stride, int n, int size) {
  std::vector<int> edges;
  edges.reserve(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    edges.push_back(first_lo + i * stride);
    edges.push_back(first_lo + i * stride + size);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

int edge_index(const std::vector<int>& edges, int v) {
  return static_cast<int>(std::lower_bound(edges.begin(), edges.end(), v) - edges.begin());
}

}  // namespace

McMap gt_mc_map(const std::vector<Point>& points, const EvalGrid& grid, double microns_per_pixel) {
  if (grid.nx < 1 || grid.ny < 1) throw GeometryError("evaluation grid is empty");
  const Rect first = grid.window_at(0, 0);
  // Compress coordinates onto window edges, histogram points into the
  // resulting cells, then answer each window with a prefix-sum lookup.
  const auto xe = window_edges(first.x, grid.stride, grid.nx, grid.window.w);
  const auto ye = window_edges(first.y, grid.stride, grid.ny, grid.window.h);
  const int cw = static_cast<int>(xe.size()) - 1;
  const int ch = static_cast<int>(ye.size()) - 1;
  std::vector<std::int64_t> prefix(static_cast<std::size_t>(cw + 1) * static_cast<std::size_t>(ch + 1), 0);
  auto at = [&](int cx, int cy) -> std::int64_t& {
    return prefix[static_cast<std::size_t>(cy) * static_cast<std::size_t>(cw + 1) + static_cast<std::size_t>(cx)];
  };
  for (const Point& p : points) {
    if (p.x < xe.front() || p.x >= xe.back() || p.y < ye.front() || p.y >= ye.back()) continue;
    const int cx = static_cast<int>(std::upper_bound(xe.begin(), xe.end(), p.x) - xe.begin()) - 1;
    const int cy = static_cast<int>(std::upper_bound(ye.begin(), ye.end(), p.y) - ye.begin()) - 1;
    at(cx + 1, cy + 1) += 1;
  }
  for (int cy = 1; cy <= ch; ++cy) {
    for (int cx = 1; cx <= cw; ++cx) at(cx, cy) += at(cx - 1, cy) + at(cx, cy - 1) - at(cx - 1, cy - 1);
  }
  McMap out(grid.nx, grid.ny, microns_per_pixel * grid.stride);
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Rect r = grid.window_at(i, j);
      const int x0 = edge_index(xe, r.x);
      const int x1 = edge_index(xe, r.x + r.w);
      const int y0 = edge_index(ye, r.y);
      const int y1 = edge_index(ye, r.y + r.h);
      out(i, j) = static_cast<std::int32_t>(at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0));
    }
  }
  return out;
}

McMap gt_mc_map(const std::vector<Point>& points, WindowDims window, int width, int height, double microns_per_pixel,
                int grid_stride) {
  return gt_mc_map(points, make_eval_grid(width, height, window, grid_stride), microns_per_pixel);
}

}  // namespace foi
