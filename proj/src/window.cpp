#include "foi/window.hpp"

#include <cmath>

namespace foi {

WindowDims foi_window_dims(double microns_per_pixel, double area_mm2, int aspect_w, int aspect_h) {
  if (!(microns_per_pixel > 0.0) || !(area_mm2 > 0.0) || aspect_w <= 0 || aspect_h <= 0) {
    throw ParameterError("window geometry requires positive pitch, area and aspect");
  }
  const double height_um = std::sqrt(area_mm2 * aspect_h / aspect_w) * 1000.0;
  const long long h = round_half_up(height_um / microns_per_pixel);
  if (h < 1) throw ParameterError("window is smaller than one pixel at this pitch");
  const long long w = round_half_up(static_cast<double>(h) * aspect_w / aspect_h);
  return WindowDims{static_cast<int>(w), static_cast<int>(h)};
}

}  // namespace foi
