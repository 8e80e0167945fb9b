#include "foi/raster.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace foi {

Rect TileGrid::tile_rect(std::size_t index) const {
  const TileOrigin& o = origins.at(index);
  return Rect{o.x, o.y, std::min(tile_size, width - o.x), std::min(tile_size, height - o.y)};
}

GrayPlane to_grayscale(const RgbImage& rgb) {
  if (!rgb.r.same_shape(rgb.g) || !rgb.r.same_shape(rgb.b)) {
    throw DimensionError("RGB channels differ in dimensions");
  }
  GrayPlane out(rgb.width(), rgb.height(), rgb.microns_per_pixel());
  auto r = rgb.r.values();
  auto g = rgb.g.values();
  auto b = rgb.b.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    // Integer form of the luminance weights; +500 rounds half-up.
    const unsigned luma = 299u * r[i] + 587u * g[i] + 114u * b[i] + 500u;
    dst[i] = static_cast<std::uint8_t>(std::min(255u, luma / 1000u));
  }
  return out;
}

namespace {

template <typename T, typename Acc, typename Finish>
Plane<T> block_reduce(const Plane<T>& plane, int factor, Finish finish) {
  if (factor < 1) throw ParameterError("downsample factor must be >= 1, got " + std::to_string(factor));
  if (factor == 1) return plane;
  const int ow = (plane.width() + factor - 1) / factor;
  const int oh = (plane.height() + factor - 1) / factor;
  Plane<T> out(ow, oh, plane.microns_per_pixel() * factor);
  std::vector<Acc> acc(static_cast<std::size_t>(ow));
  for (int oy = 0; oy < oh; ++oy) {
    std::fill(acc.begin(), acc.end(), Acc{});
    const int y0 = oy * factor;
    const int y1 = std::min(plane.height(), y0 + factor);
    for (int y = y0; y < y1; ++y) {
      auto src = plane.row(y);
      for (int x = 0; x < plane.width(); ++x) acc[static_cast<std::size_t>(x / factor)] += src[static_cast<std::size_t>(x)];
    }
    auto dst = out.row(oy);
    for (int ox = 0; ox < ow; ++ox) {
      const int x0 = ox * factor;
      const int x1 = std::min(plane.width(), x0 + factor);
      const long long count = static_cast<long long>(x1 - x0) * (y1 - y0);
      dst[static_cast<std::size_t>(ox)] = finish(acc[static_cast<std::size_t>(ox)], count);
    }
  }
  return out;
}

}  // namespace

GrayPlane downsample(const GrayPlane& plane, int factor) {
  return block_reduce<std::uint8_t, long long>(plane, factor, [](long long sum, long long n) {
    // floor(sum / n + 1/2) in exact integer arithmetic.
    return static_cast<std::uint8_t>((2 * sum + n) / (2 * n));
  });
}

Plane<float> downsample(const Plane<float>& plane, int factor) {
  return block_reduce<float, double>(plane, factor, [](double sum, long long n) {
    return static_cast<float>(sum / static_cast<double>(n));
  });
}

std::vector<int> tile_axis_origins(int extent, int tile_size, int margin) {
  if (extent < 1) throw ParameterError("tile grid extent must be >= 1");
  if (margin < 0 || tile_size <= 2 * margin) {
    throw ParameterError("tile_size must exceed 2*margin (tile_size=" + std::to_string(tile_size) +
                         ", margin=" + std::to_string(margin) + ")");
  }
  const int stride = tile_size - 2 * margin;
  std::vector<int> origins{0};
  while (origins.back() + tile_size < extent) {
    int next = origins.back() + stride;
    if (next + tile_size > extent) next = extent - tile_size;
    origins.push_back(next);
  }
  return origins;
}

TileGrid make_tile_grid(int width, int height, int tile_size, int margin) {
  TileGrid grid;
  grid.width = width;
  grid.height = height;
  grid.tile_size = tile_size;
  grid.margin = margin;
  grid.x_origins = tile_axis_origins(width, tile_size, margin);
  grid.y_origins = tile_axis_origins(height, tile_size, margin);
  grid.origins.reserve(grid.x_origins.size() * grid.y_origins.size());
  for (int y : grid.y_origins) {
    for (int x : grid.x_origins) grid.origins.push_back({x, y});
  }
  return grid;
}

namespace {

constexpr int kUnbounded = std::numeric_limits<int>::max();

void build_cover(const std::vector<int>& origins, int tile_size, int extent,
                 std::vector<std::vector<std::pair<int, int>>>& cover) {
  cover.assign(static_cast<std::size_t>(extent), {});
  for (std::size_t i = 0; i < origins.size(); ++i) {
    const int lo = origins[i];
    const int hi = std::min(extent, lo + tile_size);
    for (int c = lo; c < hi; ++c) {
      const int left = lo == 0 ? kUnbounded : c - lo;
      const int right = hi == extent ? kUnbounded : hi - 1 - c;
      cover[static_cast<std::size_t>(c)].emplace_back(static_cast<int>(i), std::min(left, right));
    }
  }
}

}  // namespace

Stitcher::Stitcher(const TileGrid& grid, double microns_per_pixel)
    : grid_(grid), out_(grid.width, grid.height, microns_per_pixel, 0.0f), received_(grid.tile_count(), 0) {
  std::vector<std::vector<std::pair<int, int>>> xs;
  std::vector<std::vector<std::pair<int, int>>> ys;
  build_cover(grid_.x_origins, grid_.tile_size, grid_.width, xs);
  build_cover(grid_.y_origins, grid_.tile_size, grid_.height, ys);
  x_cover_.resize(xs.size());
  y_cover_.resize(ys.size());
  for (std::size_t i = 0; i < xs.size(); ++i) x_cover_[i].entries = std::move(xs[i]);
  for (std::size_t i = 0; i < ys.size(); ++i) y_cover_[i].entries = std::move(ys[i]);
}

std::size_t Stitcher::owner(int x, int y) const {
  const auto nx = grid_.x_origins.size();
  std::size_t best = std::numeric_limits<std::size_t>::max();
  int best_depth = -1;
  for (const auto& [iy, dy] : y_cover_[static_cast<std::size_t>(y)].entries) {
    for (const auto& [ix, dx] : x_cover_[static_cast<std::size_t>(x)].entries) {
      const int depth = std::min(dx, dy);
      const std::size_t idx = static_cast<std::size_t>(iy) * nx + static_cast<std::size_t>(ix);
      if (depth > best_depth || (depth == best_depth && idx < best)) {
        best_depth = depth;
        best = idx;
      }
    }
  }
  return best;
}

void Stitcher::add(std::size_t index, const SegMap& tile) {
  if (index >= grid_.tile_count()) throw ParameterError("tile index out of range");
  const Rect r = grid_.tile_rect(index);
  if (tile.width() != r.w || tile.height() != r.h) {
    throw DimensionError("tile map is " + std::to_string(tile.width()) + "x" + std::to_string(tile.height()) +
                         ", expected " + std::to_string(r.w) + "x" + std::to_string(r.h));
  }
  // Owned pixels are disjoint between tiles, so concurrent adds never write the same pixel.
  for (int ty = 0; ty < r.h; ++ty) {
    const int y = r.y + ty;
    auto src = tile.row(ty);
    auto dst = out_.row(y);
    for (int tx = 0; tx < r.w; ++tx) {
      const int x = r.x + tx;
      if (owner(x, y) == index) dst[static_cast<std::size_t>(x)] = src[static_cast<std::size_t>(tx)];
    }
  }
  std::lock_guard lock(mutex_);
  received_[index] = 1;
}

SegMap Stitcher::finish() && {
  for (std::size_t i = 0; i < received_.size(); ++i) {
    if (!received_[i]) {
      const TileOrigin& o = grid_.origins[i];
      throw IncompleteInputError("missing tile map for origin (" + std::to_string(o.x) + ", " + std::to_string(o.y) +
                                 ")");
    }
  }
  return std::move(out_);
}

SegMap stitch(const std::vector<std::pair<TileOrigin, SegMap>>& tile_maps, const TileGrid& grid,
              double microns_per_pixel) {
  Stitcher stitcher(grid, microns_per_pixel);
  for (const auto& [origin, map] : tile_maps) {
    const auto it = std::find(grid.origins.begin(), grid.origins.end(), origin);
    if (it == grid.origins.end()) {
      throw ParameterError("tile origin (" + std::to_string(origin.x) + ", " + std::to_string(origin.y) +
                           ") is not on the grid");
    }
    stitcher.add(static_cast<std::size_t>(it - grid.origins.begin()), map);
  }
  return std::move(stitcher).finish();
}

}  // namespace foi
