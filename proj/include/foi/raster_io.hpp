#pragma once

#include <filesystem>

#include "foi/raster.hpp"

namespace foi::io {

// 8-bit rasters: binary PGM (P5), binary PPM (P6) and PNG. Pixel pitch is not
// stored in these formats and is supplied by the caller on read.

GrayPlane read_gray(const std::filesystem::path& path, double microns_per_pixel);
RgbImage read_rgb(const std::filesystem::path& path, double microns_per_pixel);

void write_pgm(const std::filesystem::path& path, const GrayPlane& plane);
void write_ppm(const std::filesystem::path& path, const RgbImage& image);
void write_png(const std::filesystem::path& path, const GrayPlane& plane);
void write_png(const std::filesystem::path& path, const RgbImage& image);

/// Chooses PNG or PGM/PPM from the file extension.
void write_image(const std::filesystem::path& path, const GrayPlane& plane);
void write_image(const std::filesystem::path& path, const RgbImage& image);

/// FOIM stream: "FOIM", u32 width, u32 height, f32 microns_per_pixel, then
/// width*height f32 values, all little-endian, row-major.
void write_foim(const std::filesystem::path& path, const Plane<float>& plane);
Plane<float> read_foim(const std::filesystem::path& path);

}  // namespace foi::io
