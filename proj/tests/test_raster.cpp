#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include <unistd.h>

#include "foi/raster.hpp"
#include "foi/raster_io.hpp"
#include "oracles.hpp"

namespace foi {
namespace {

RgbImage solid_rgb(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return RgbImage{GrayPlane(w, h, 0.25, r), GrayPlane(w, h, 0.25, g), GrayPlane(w, h, 0.25, b)};
}

TEST(Plane, RejectsDegenerateShapes) {
  EXPECT_THROW(GrayPlane(0, 3, 1.0), ParameterError);
  EXPECT_THROW(GrayPlane(3, 3, 0.0), ParameterError);
  EXPECT_THROW(GrayPlane(2, 2, 1.0, std::vector<std::uint8_t>(3)), DimensionError);
}

TEST(Grayscale, FixedExamples) {
  EXPECT_EQ(to_grayscale(solid_rgb(3, 2, 255, 255, 255)).values()[0], 255);
  EXPECT_EQ(to_grayscale(solid_rgb(3, 2, 0, 0, 0)).values()[5], 0);
  EXPECT_EQ(to_grayscale(solid_rgb(1, 1, 255, 0, 0))(0, 0), 76);
  EXPECT_EQ(to_grayscale(solid_rgb(1, 1, 0, 255, 0))(0, 0), 150);  // 149.685
  EXPECT_EQ(to_grayscale(solid_rgb(1, 1, 0, 0, 255))(0, 0), 29);   // 29.07
}

TEST(Grayscale, ChannelMismatchThrows) {
  RgbImage img = solid_rgb(4, 4, 1, 2, 3);
  img.b = GrayPlane(4, 5, 0.25);
  EXPECT_THROW(to_grayscale(img), DimensionError);
}

TEST(Grayscale, MonotoneInEveryChannel) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> d(0, 255);
  for (int i = 0; i < 5000; ++i) {
    const int r = d(rng), g = d(rng), b = d(rng);
    const int base = to_grayscale(solid_rgb(1, 1, r, g, b))(0, 0);
    const int bump = d(rng);
    EXPECT_GE(to_grayscale(solid_rgb(1, 1, std::min(255, r + bump), g, b))(0, 0), base);
    EXPECT_GE(to_grayscale(solid_rgb(1, 1, r, std::min(255, g + bump), b))(0, 0), base);
    EXPECT_GE(to_grayscale(solid_rgb(1, 1, r, g, std::min(255, b + bump)))(0, 0), base);
  }
}

TEST(Downsample, Examples) {
  std::mt19937_64 rng(1);
  const auto p = oracle::random_plane<std::uint8_t>(rng, 17, 9, 0, 255);
  EXPECT_EQ(downsample(p, 1), p);

  const GrayPlane flat(2, 2, 0.25, 100);
  const auto one = downsample(flat, 2);
  ASSERT_EQ(one.width(), 1);
  EXPECT_EQ(one(0, 0), 100);
  EXPECT_DOUBLE_EQ(one.microns_per_pixel(), 0.5);

  // Mean 127.5 rounds half-up.
  const GrayPlane split(2, 2, 1.0, std::vector<std::uint8_t>{0, 0, 255, 255});
  EXPECT_EQ(downsample(split, 2)(0, 0), 128);

  EXPECT_THROW(downsample(flat, 0), ParameterError);
}

TEST(Downsample, EdgeBlocksAverageCoveredPixelsOnly) {
  GrayPlane p(5, 1, 1.0, std::vector<std::uint8_t>{10, 10, 10, 10, 200});
  const auto d = downsample(p, 4);
  ASSERT_EQ(d.width(), 2);
  EXPECT_EQ(d(0, 0), 10);
  EXPECT_EQ(d(1, 0), 200);
}

TEST(Downsample, ComposedFactorsAgreeOnDimensions) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> dim(1, 300);
  std::uniform_int_distribution<int> fac(1, 7);
  for (int i = 0; i < 200; ++i) {
    const GrayPlane p(dim(rng), dim(rng), 0.25);
    const int a = fac(rng), b = fac(rng);
    const auto two = downsample(downsample(p, a), b);
    const auto once = downsample(p, a * b);
    EXPECT_EQ(two.width(), once.width());
    EXPECT_EQ(two.height(), once.height());
    EXPECT_DOUBLE_EQ(two.microns_per_pixel(), once.microns_per_pixel());
  }
}

TEST(Downsample, FloatPlaneIsBlockMean) {
  Plane<float> p(4, 2, 1.0, std::vector<float>{0.f, 1.f, 0.5f, 0.5f, 1.f, 0.f, 0.5f, 0.5f});
  const auto d = downsample(p, 2);
  EXPECT_FLOAT_EQ(d(0, 0), 0.5f);
  EXPECT_FLOAT_EQ(d(1, 0), 0.5f);
}

TEST(TileGrid, AxisOriginExamples) {
  EXPECT_EQ(tile_axis_origins(512, 512, 64), (std::vector<int>{0}));
  EXPECT_EQ(tile_axis_origins(896, 512, 64), (std::vector<int>{0, 384}));
  EXPECT_EQ(tile_axis_origins(1000, 512, 64), (std::vector<int>{0, 384, 488}));
  EXPECT_EQ(tile_axis_origins(100, 512, 64), (std::vector<int>{0}));
  EXPECT_THROW(tile_axis_origins(1000, 128, 64), ParameterError);
}

TEST(TileGrid, OriginsIncreaseAndReachTheEdge) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> ext(1, 5000);
  for (int i = 0; i < 500; ++i) {
    const int extent = ext(rng);
    const auto o = tile_axis_origins(extent, 512, 64);
    for (std::size_t k = 1; k < o.size(); ++k) {
      EXPECT_LT(o[k - 1], o[k]);
      EXPECT_LE(o[k] - o[k - 1], 384);  // interiors stay contiguous
    }
    EXPECT_EQ(std::min(extent, o.back() + 512), extent);
  }
}

TEST(TileGrid, RowMajorOrigins) {
  const auto g = make_tile_grid(1000, 512, 512, 64);
  ASSERT_EQ(g.tile_count(), 3u);
  EXPECT_EQ(g.origins[2], (TileOrigin{488, 0}));
  EXPECT_EQ(g.tile_rect(1), (Rect{384, 0, 512, 512}));
}

using TileFn = float (*)(float);

SegMap apply(const SegMap& p, TileFn f) {
  SegMap out = p;
  for (auto& v : out.values()) v = f(v);
  return out;
}

SegMap crop(const SegMap& p, const Rect& r) {
  SegMap out(r.w, r.h, p.microns_per_pixel());
  for (int y = 0; y < r.h; ++y)
    for (int x = 0; x < r.w; ++x) out(x, y) = p(r.x + x, r.y + y);
  return out;
}

TEST(Stitch, SingleTileIsIdentity) {
  std::mt19937_64 rng(9);
  const auto p = oracle::random_plane<float>(rng, 300, 200, 0.f, 1.f);
  const auto grid = make_tile_grid(300, 200, 512, 64);
  EXPECT_EQ(stitch({{grid.origins[0], p}}, grid, 1.0), p);
}

TEST(Stitch, EqualConstantTilesGiveConstantOutput) {
  const auto grid = make_tile_grid(1000, 700, 512, 64);
  std::vector<std::pair<TileOrigin, SegMap>> tiles;
  for (std::size_t i = 0; i < grid.tile_count(); ++i) {
    const Rect r = grid.tile_rect(i);
    tiles.emplace_back(grid.origins[i], SegMap(r.w, r.h, 1.0, 0.25f));
  }
  const auto out = stitch(tiles, grid, 1.0);
  for (float v : out.values()) ASSERT_EQ(v, 0.25f);
}

TEST(Stitch, MissingTileIsReported) {
  const auto grid = make_tile_grid(1000, 512, 512, 64);
  const Rect r = grid.tile_rect(0);
  EXPECT_THROW(stitch({{grid.origins[0], SegMap(r.w, r.h, 1.0)}}, grid, 1.0), IncompleteInputError);
}

TEST(Stitch, MarginPixelsComeFromTheDeeperTile) {
  // Two tiles overlap on [384, 512). Depth in tile 0 is 511 - x, in tile 1
  // it is x - 384; the plane edges do not count.
  const auto grid = make_tile_grid(896, 512, 512, 64);
  Stitcher s(grid, 1.0);
  EXPECT_EQ(s.owner(400, 100), 0u);
  EXPECT_EQ(s.owner(500, 100), 1u);
  EXPECT_EQ(s.owner(447, 100), 0u);
  EXPECT_EQ(s.owner(448, 100), 1u);
  EXPECT_EQ(s.owner(0, 0), 0u);
  EXPECT_EQ(s.owner(895, 511), 1u);
}

TEST(Stitch, PointwiseTileFunctionRoundTripsExactly) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> dim(1, 2048);
  const TileFn fns[] = {[](float v) { return v; }, [](float v) { return v * v; },
                        [](float v) { return v > 0.5f ? 1.f : 0.f; }};
  for (int trial = 0; trial < 6; ++trial) {
    const int w = trial == 0 ? 2048 : dim(rng);
    const int h = trial == 0 ? 2048 : dim(rng);
    const auto plane = oracle::random_plane<float>(rng, w, h, 0.f, 1.f);
    const TileFn f = fns[trial % 3];
    const auto grid = make_tile_grid(w, h, 512, 64);
    std::vector<std::pair<TileOrigin, SegMap>> tiles;
    for (std::size_t i = 0; i < grid.tile_count(); ++i) {
      tiles.emplace_back(grid.origins[i], apply(crop(plane, grid.tile_rect(i)), f));
    }
    EXPECT_EQ(stitch(tiles, grid, 1.0), apply(plane, f)) << w << "x" << h;
  }
}

class RasterIo : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() / ("foi_io_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST_F(RasterIo, GrayAndRgbRoundTripThroughAllFormats) {
  std::mt19937_64 rng(13);
  const auto gray = oracle::random_plane<std::uint8_t>(rng, 37, 21, 0, 255, 0.5);
  const RgbImage rgb{oracle::random_plane<std::uint8_t>(rng, 37, 21, 0, 255, 0.5),
                     oracle::random_plane<std::uint8_t>(rng, 37, 21, 0, 255, 0.5),
                     oracle::random_plane<std::uint8_t>(rng, 37, 21, 0, 255, 0.5)};
  for (const char* ext : {".pgm", ".png"}) {
    const auto path = dir_ / (std::string("g") + ext);
    io::write_image(path, gray);
    EXPECT_EQ(io::read_gray(path, 0.5), gray) << ext;
  }
  for (const char* ext : {".ppm", ".png"}) {
    const auto path = dir_ / (std::string("c") + ext);
    io::write_image(path, rgb);
    const auto back = io::read_rgb(path, 0.5);
    EXPECT_EQ(back.r, rgb.r) << ext;
    EXPECT_EQ(back.g, rgb.g) << ext;
    EXPECT_EQ(back.b, rgb.b) << ext;
    EXPECT_EQ(io::read_gray(path, 0.5), to_grayscale(rgb)) << ext;
  }
}

TEST_F(RasterIo, NetpbmHeaderWithComment) {
  const auto path = dir_ / "comment.pgm";
  {
    std::ofstream out(path, std::ios::binary);
    out << "P5\n# made by hand\n2 1\n255\n";
    out.put(static_cast<char>(7)).put(static_cast<char>(250));
  }
  const auto p = io::read_gray(path, 1.0);
  EXPECT_EQ(p(0, 0), 7);
  EXPECT_EQ(p(1, 0), 250);
}

TEST_F(RasterIo, FoimLayoutIsLittleEndianWithSixteenByteHeader) {
  Plane<float> p(2, 1, 0.25, std::vector<float>{1.0f, 0.5f});
  const auto path = dir_ / "m.foim";
  io::write_foim(path, p);
  std::ifstream in(path, std::ios::binary);
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::vector<unsigned char> expected{'F', 'O', 'I', 'M', 2,    0,    0,    0,    1, 0, 0, 0,
                                            0,   0,   0x80, 0x3e,  // 0.25f
                                            0,   0,   0x80, 0x3f,  // 1.0f
                                            0,   0,   0,    0x3f};  // 0.5f
  EXPECT_EQ(bytes, expected);
  EXPECT_EQ(io::read_foim(path), p);
}

TEST_F(RasterIo, ErrorsAreTyped) {
  EXPECT_THROW(io::read_gray(dir_ / "absent.pgm", 1.0), MissingInputError);
  const auto junk = dir_ / "junk.bin";
  std::ofstream(junk) << "hello";
  EXPECT_THROW(io::read_gray(junk, 1.0), ParseError);
  EXPECT_THROW(io::read_foim(junk), ParseError);
}

}  // namespace
}  // namespace foi
