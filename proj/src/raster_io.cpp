#include "foi/raster_io.hpp"

#include <png.h>

#include <array>
#include <bit>
#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

namespace foi::io {

namespace fs = std::filesystem;

namespace {

struct Decoded {
  int width = 0;
  int height = 0;
  int channels = 0;  // 1 or 3
  std::vector<std::uint8_t> pixels;  // interleaved
};

void require_exists(const fs::path& path) {
  if (!fs::exists(path)) throw MissingInputError("no such file: " + path.string());
}

std::vector<char> slurp(const fs::path& path) {
  require_exists(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

// Netpbm header: magic, width, height, maxval, separated by whitespace and
// optional '#' comments, then exactly one whitespace byte.
Decoded decode_netpbm(const std::vector<char>& bytes, const fs::path& path) {
  std::size_t pos = 2;
  auto next_int = [&]() {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
    long value = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > (1L << 30)) throw ParseError("netpbm header value too large in " + path.string());
      ++pos;
      any = true;
    }
    if (!any) throw ParseError("malformed netpbm header in " + path.string());
    return static_cast<int>(value);
  };
  Decoded d;
  d.channels = bytes[1] == '5' ? 1 : 3;
  d.width = next_int();
  d.height = next_int();
  const int maxval = next_int();
  if (maxval < 1 || maxval > 255) throw ParseError("only 8-bit netpbm is supported: " + path.string());
  ++pos;
  const std::size_t n = static_cast<std::size_t>(d.width) * d.height * d.channels;
  if (d.width < 1 || d.height < 1 || bytes.size() < pos + n) {
    throw ParseError("truncated netpbm pixel data in " + path.string());
  }
  d.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  if (maxval != 255) {
    for (auto& v : d.pixels) v = static_cast<std::uint8_t>((v * 255 + maxval / 2) / maxval);
  }
  return d;
}

Decoded decode_png(const fs::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw ParseError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  const bool gray = (image.format & PNG_FORMAT_FLAG_COLOR) == 0;
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  Decoded d;
  d.width = static_cast<int>(image.width);
  d.height = static_cast<int>(image.height);
  d.channels = gray ? 1 : 3;
  d.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, d.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw ParseError("cannot decode PNG " + path.string() + ": " + image.message);
  }
  return d;
}

Decoded decode(const fs::path& path) {
  const auto bytes = slurp(path);
  static constexpr std::array<unsigned char, 8> kPngMagic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngMagic.data(), 8) == 0) return decode_png(path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6')) return decode_netpbm(bytes, path);
  throw ParseError("unsupported raster format (expected PNG, P5 or P6): " + path.string());
}

std::vector<std::uint8_t> interleave(const RgbImage& image) {
  if (!image.r.same_shape(image.g) || !image.r.same_shape(image.b)) {
    throw DimensionError("RGB channels differ in dimensions");
  }
  std::vector<std::uint8_t> out(image.r.size() * 3);
  auto r = image.r.values();
  auto g = image.g.values();
  auto b = image.b.values();
  for (std::size_t i = 0; i < r.size(); ++i) {
    out[3 * i] = r[i];
    out[3 * i + 1] = g[i];
    out[3 * i + 2] = b[i];
  }
  return out;
}

void write_netpbm(const fs::path& path, char kind, int w, int h, const std::uint8_t* data, std::size_t n) {
  auto out = open_out(path);
  out << 'P' << kind << '\n' << w << ' ' << h << "\n255\n";
  out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n));
  if (!out) throw IoError("write failed: " + path.string());
}

void encode_png(const fs::path& path, int w, int h, bool gray, const std::uint8_t* data) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(w);
  image.height = static_cast<png_uint_32>(h);
  image.format = gray ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, data, 0, nullptr)) {
    throw IoError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

bool has_png_extension(const fs::path& path) {
  auto ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return ext == ".png";
}

void put_u32(std::vector<unsigned char>& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

}  // namespace

GrayPlane read_gray(const fs::path& path, double microns_per_pixel) {
  Decoded d = decode(path);
  if (d.channels == 1) return GrayPlane(d.width, d.height, microns_per_pixel, std::move(d.pixels));
  return to_grayscale(read_rgb(path, microns_per_pixel));
}

RgbImage read_rgb(const fs::path& path, double microns_per_pixel) {
  Decoded d = decode(path);
  RgbImage img{GrayPlane(d.width, d.height, microns_per_pixel), GrayPlane(d.width, d.height, microns_per_pixel),
               GrayPlane(d.width, d.height, microns_per_pixel)};
  auto r = img.r.values();
  auto g = img.g.values();
  auto b = img.b.values();
  const std::size_t c = static_cast<std::size_t>(d.channels);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = d.pixels[i * c];
    g[i] = d.pixels[i * c + (c == 3 ? 1 : 0)];
    b[i] = d.pixels[i * c + (c == 3 ? 2 : 0)];
  }
  return img;
}

void write_pgm(const fs::path& path, const GrayPlane& plane) {
  write_netpbm(path, '5', plane.width(), plane.height(), plane.values().data(), plane.size());
}

void write_ppm(const fs::path& path, const RgbImage& image) {
  const auto data = interleave(image);
  write_netpbm(path, '6', image.width(), image.height(), data.data(), data.size());
}

void write_png(const fs::path& path, const GrayPlane& plane) {
  encode_png(path, plane.width(), plane.height(), true, plane.values().data());
}

void write_png(const fs::path& path, const RgbImage& image) {
  const auto data = interleave(image);
  encode_png(path, image.width(), image.height(), false, data.data());
}

void write_image(const fs::path& path, const GrayPlane& plane) {
  if (has_png_extension(path)) {
    write_png(path, plane);
  } else {
    write_pgm(path, plane);
  }
}

void write_image(const fs::path& path, const RgbImage& image) {
  if (has_png_extension(path)) {
    write_png(path, image);
  } else {
    write_ppm(path, image);
  }
}

void write_foim(const fs::path& path, const Plane<float>& plane) {
  std::vector<unsigned char> buf;
  buf.reserve(16 + plane.size() * 4);
  buf.insert(buf.end(), {'F', 'O', 'I', 'M'});
  put_u32(buf, static_cast<std::uint32_t>(plane.width()));
  put_u32(buf, static_cast<std::uint32_t>(plane.height()));
  put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(plane.microns_per_pixel())));
  for (float v : plane.values()) put_u32(buf, std::bit_cast<std::uint32_t>(v));
  auto out = open_out(path);
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

Plane<float> read_foim(const fs::path& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < 16 || std::memcmp(bytes.data(), "FOIM", 4) != 0) {
    throw ParseError("not a FOIM stream: " + path.string());
  }
  const std::uint32_t w = get_u32(bytes.data() + 4);
  const std::uint32_t h = get_u32(bytes.data() + 8);
  const float mpp = std::bit_cast<float>(get_u32(bytes.data() + 12));
  if (w == 0 || h == 0 || w > (1u << 30) || h > (1u << 30)) throw ParseError("bad FOIM dimensions in " + path.string());
  const std::size_t n = static_cast<std::size_t>(w) * h;
  if (bytes.size() != 16 + 4 * n) throw ParseError("FOIM payload size mismatch in " + path.string());
  std::vector<float> values(n);
  for (std::size_t i = 0; i < n; ++i) values[i] = std::bit_cast<float>(get_u32(bytes.data() + 16 + 4 * i));
  return Plane<float>(static_cast<int>(w), static_cast<int>(h), static_cast<double>(mpp), std::move(values));
}

}  // namespace foi::io
