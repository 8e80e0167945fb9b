#pragma once

#include "foi/raster.hpp"

namespace foi {

/// Physical size of the reference counting area (10 high-power fields).
struct FoiWindow {
  double area_mm2 = 2.37;
  int aspect_w = 4;
  int aspect_h = 3;
};

struct WindowDims {
  int w = 0;
  int h = 0;
  bool operator==(const WindowDims&) const = default;
};

/// Pixel dimensions of `window` at the given pitch: the height is rounded
/// first and the width derived from it so the aspect holds to within a pixel.
WindowDims foi_window_dims(double microns_per_pixel, double area_mm2 = 2.37, int aspect_w = 4, int aspect_h = 3);
inline WindowDims foi_window_dims(double microns_per_pixel, const FoiWindow& window) {
  return foi_window_dims(microns_per_pixel, window.area_mm2, window.aspect_w, window.aspect_h);
}

/// Top-left corner of a w x h window centered at pixel (cx, cy). Even sizes
/// put the center pixel right of / below the geometric middle.
inline Rect centered_window(int cx, int cy, WindowDims dims) {
  return Rect{cx - dims.w / 2, cy - dims.h / 2, dims.w, dims.h};
}

inline bool fits(const Rect& r, int width, int height) {
  return r.x >= 0 && r.y >= 0 && r.x + r.w <= width && r.y + r.h <= height;
}

}  // namespace foi
