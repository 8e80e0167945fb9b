#pragma once

#include <cstdint>
#include <type_traits>
#include <vector>

#include "foi/raster.hpp"

namespace foi {

/// Summed-area table with one row/column of zero padding.
///
/// Integer planes accumulate in int64 (exact); floating planes in double.
template <typename T>
class SummedAreaTable {
 public:
  using Acc = std::conditional_t<std::is_integral_v<T>, std::int64_t, double>;

  explicit SummedAreaTable(const Plane<T>& plane)
      : width_(plane.width()), height_(plane.height()),
        table_(static_cast<std::size_t>(width_ + 1) * static_cast<std::size_t>(height_ + 1), Acc{}) {
    for (int y = 0; y < height_; ++y) {
      auto src = plane.row(y);
      Acc running{};
      for (int x = 0; x < width_; ++x) {
        running += static_cast<Acc>(src[static_cast<std::size_t>(x)]);
        at(x + 1, y + 1) = at(x + 1, y) + running;
      }
    }
  }

  int width() const { return width_; }
  int height() const { return height_; }

  /// Sum over [x, x+w) x [y, y+h); the rectangle must lie inside the plane.
  Acc sum(int x, int y, int w, int h) const {
    return at(x + w, y + h) - at(x, y + h) - at(x + w, y) + at(x, y);
  }

 private:
  Acc& at(int x, int y) { return table_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(x)]; }
  const Acc& at(int x, int y) const {
    return table_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_ + 1) + static_cast<std::size_t>(x)];
  }

  int width_;
  int height_;
  std::vector<Acc> table_;
};

}  // namespace foi
