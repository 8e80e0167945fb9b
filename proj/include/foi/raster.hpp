#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "foi/error.hpp"

namespace foi {

/// Row-major scalar raster with physical pixel pitch.
///
/// Used for grayscale images, segmentation maps, density maps and binary
/// masks alike; the element type tells them apart.
template <typename T>
class Plane {
 public:
  using value_type = T;

  Plane() = default;

  Plane(int width, int height, double microns_per_pixel, T fill = T{})
      : width_(width), height_(height), mpp_(microns_per_pixel) {
    check_shape();
    values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
  }

  Plane(int width, int height, double microns_per_pixel, std::vector<T> values)
      : width_(width), height_(height), mpp_(microns_per_pixel), values_(std::move(values)) {
    check_shape();
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      throw DimensionError("plane value count does not match width*height");
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }
  double microns_per_pixel() const { return mpp_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  bool same_shape(const Plane& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  template <typename U>
  bool same_shape(const Plane<U>& other) const {
    return width_ == other.width() && height_ == other.height();
  }

  T operator()(int x, int y) const { return values_[index(x, y)]; }
  T& operator()(int x, int y) { return values_[index(x, y)]; }

  std::span<const T> values() const { return values_; }
  std::span<T> values() { return values_; }

  std::span<const T> row(int y) const {
    return std::span<const T>(values_).subspan(index(0, y), static_cast<std::size_t>(width_));
  }
  std::span<T> row(int y) {
    return std::span<T>(values_).subspan(index(0, y), static_cast<std::size_t>(width_));
  }

  bool operator==(const Plane& other) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }

  void check_shape() const {
    if (width_ < 1 || height_ < 1) throw ParameterError("plane dimensions must be >= 1");
    if (!(mpp_ > 0.0)) throw ParameterError("microns_per_pixel must be > 0");
  }

  int width_ = 0;
  int height_ = 0;
  double mpp_ = 1.0;
  std::vector<T> values_;
};

using GrayPlane = Plane<std::uint8_t>;
/// Values restricted to {0, 1}.
using BinaryMask = Plane<std::uint8_t>;
/// Unit-interval per-pixel mitosis likelihood.
using SegMap = Plane<float>;

struct RgbImage {
  GrayPlane r;
  GrayPlane g;
  GrayPlane b;

  int width() const { return r.width(); }
  int height() const { return r.height(); }
  double microns_per_pixel() const { return r.microns_per_pixel(); }
};

struct Rect {
  int x = 0;
  int y = 0;
  int w = 1;
  int h = 1;

  int right() const { return x + w; }
  int bottom() const { return y + h; }
  bool contains(int px, int py) const { return px >= x && px < x + w && py >= y && py < y + h; }
  bool operator==(const Rect&) const = default;
};

struct TileOrigin {
  int x = 0;
  int y = 0;
  bool operator==(const TileOrigin&) const = default;
};

/// Overlapping tile layout over a plane.
///
/// Tiles are `tile_size` square (clipped at the plane edge) and advance by
/// `stride() = tile_size - 2 * margin`; the last origin on each axis is pulled
/// back so the final tile ends exactly on the plane edge.
struct TileGrid {
  int width = 0;
  int height = 0;
  int tile_size = 512;
  int margin = 64;
  std::vector<int> x_origins;
  std::vector<int> y_origins;
  /// Row-major (y outer, x inner).
  std::vector<TileOrigin> origins;

  int stride() const { return tile_size - 2 * margin; }
  std::size_t tile_count() const { return origins.size(); }
  Rect tile_rect(std::size_t index) const;
};

/// Luminance 0.299 R + 0.587 G + 0.114 B, rounded half-up.
GrayPlane to_grayscale(const RgbImage& rgb);

/// Block-mean reduction by an integer factor; output dims are ceil(input / factor)
/// and edge blocks average only the pixels they actually cover.
GrayPlane downsample(const GrayPlane& plane, int factor);
Plane<float> downsample(const Plane<float>& plane, int factor);

std::vector<int> tile_axis_origins(int extent, int tile_size, int margin);
TileGrid make_tile_grid(int width, int height, int tile_size = 512, int margin = 64);

/// Reassembles per-tile maps into one plane.
///
/// Each output pixel is taken from the tile in which it lies deepest, measured
/// as the distance to the nearest tile side that is not on the plane boundary.
/// Ties go to the earlier tile in row-major order. Ownership depends only on
/// geometry, so tiles may be added in any order and from several threads.
class Stitcher {
 public:
  Stitcher(const TileGrid& grid, double microns_per_pixel);

  /// Copies the pixels owned by tile `index`; `tile` must match the tile rect dims.
  void add(std::size_t index, const SegMap& tile);
  /// Throws IncompleteInputError if a tile is missing.
  SegMap finish() &&;

  /// Index of the tile that supplies pixel (x, y).
  std::size_t owner(int x, int y) const;

 private:
  struct AxisCover {
    // Up to a few tiles per axis cover any coordinate.
    std::vector<std::pair<int, int>> entries;  // (tile axis index, depth)
  };

  TileGrid grid_;
  std::vector<AxisCover> x_cover_;
  std::vector<AxisCover> y_cover_;
  SegMap out_;
  std::vector<std::uint8_t> received_;
  std::mutex mutex_;
};

SegMap stitch(const std::vector<std::pair<TileOrigin, SegMap>>& tile_maps, const TileGrid& grid,
              double microns_per_pixel);

/// Round-half-up used for every real-to-integer conversion in the project.
inline long long round_half_up(double v) { return static_cast<long long>(std::floor(v + 0.5)); }

}  // namespace foi
