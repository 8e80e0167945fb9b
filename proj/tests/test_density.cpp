#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "foi/density.hpp"
#include "foi/detector.hpp"
#include "oracles.hpp"

namespace foi {
namespace {

TEST(WindowDimsTest, QuarterMicronPitch) {
  const auto d = foi_window_dims(0.25);
  EXPECT_EQ(d, (WindowDims{7111, 5333}));
  const double area_mm2 = d.w * d.h * 0.25 * 0.25 * 1e-6;
  EXPECT_LT(std::abs(area_mm2 - 2.37) / 2.37, 0.005);
  EXPECT_LE(std::abs(d.w * 3.0 - d.h * 4.0) / 3.0, 1.0);
}

TEST(WindowDimsTest, UnitSquare) { EXPECT_EQ(foi_window_dims(1.0, 1.0, 1, 1), (WindowDims{1000, 1000})); }

TEST(WindowDimsTest, HalfMicronIsHalfTheQuarterMicronDims) {
  const auto q = foi_window_dims(0.25);
  const auto h = foi_window_dims(0.5);
  EXPECT_LE(std::abs(2 * h.w - q.w), 2);
  EXPECT_LE(std::abs(2 * h.h - q.h), 2);
}

TEST(WindowDimsTest, RejectsNonPositiveInputs) {
  EXPECT_THROW(foi_window_dims(0.0), ParameterError);
  EXPECT_THROW(foi_window_dims(1.0, -1.0), ParameterError);
  EXPECT_THROW(foi_window_dims(1.0, 1.0, 0, 3), ParameterError);
}

TEST(WindowDimsTest, AreaAndAspectHoldAcrossPitches) {
  for (double mpp = 0.2; mpp <= 4.0; mpp += 0.05) {
    const auto d = foi_window_dims(mpp);
    const double side_um = std::sqrt(2.37e6 * 3.0 / 4.0);  // height in um
    EXPECT_LE(std::abs(d.h - side_um / mpp), 0.5 + 1e-9);
    EXPECT_LE(std::abs(d.w - d.h * 4.0 / 3.0), 0.5 + 1e-9);
  }
}

template <typename T>
void expect_box_sum_matches(const Plane<T>& map, WindowDims win, double rel_tol) {
  const auto fast = box_sum(map, win);
  const auto slow = oracle::naive_box_sum(map, win.w, win.h);
  for (std::size_t i = 0; i < slow.size(); ++i) {
    const double a = fast.values()[i];
    const double b = slow[i];
    if (std::isnan(b)) {
      ASSERT_TRUE(std::isnan(a)) << i;
    } else if (rel_tol == 0.0) {
      ASSERT_EQ(a, b) << i;
    } else {
      ASSERT_LE(std::abs(a - b), rel_tol * std::max(1.0, std::abs(b))) << i;
    }
  }
}

TEST(BoxSum, ConstantMap) {
  const Plane<float> m(30, 20, 1.0, 0.5f);
  const auto s = box_sum(m, WindowDims{7, 5});
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 30; ++x) {
      if (fits(centered_window(x, y, WindowDims{7, 5}), 30, 20)) {
        EXPECT_DOUBLE_EQ(s(x, y), 0.5 * 35);
      } else {
        EXPECT_FALSE(is_defined(s(x, y)));
      }
    }
}

TEST(BoxSum, ImpulseGivesIndicatorPlateau) {
  Plane<std::uint8_t> m(40, 30, 1.0, 0);
  m(17, 11) = 1;
  const WindowDims win{6, 9};
  const auto s = box_sum(m, win);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) {
      const Rect r = centered_window(x, y, win);
      if (!fits(r, 40, 30)) continue;
      EXPECT_EQ(s(x, y), r.contains(17, 11) ? 1.0 : 0.0);
    }
}

TEST(BoxSum, RandomFloatMapMatchesNaive) {
  std::mt19937_64 rng(71);
  expect_box_sum_matches(oracle::random_plane<float>(rng, 256, 256, 0.f, 1.f), WindowDims{31, 21}, 1e-6);
}

TEST(BoxSum, RandomCasesMatchNaive) {
  std::mt19937_64 rng(73);
  std::uniform_int_distribution<int> dim(1, 96);
  for (int i = 0; i < 200; ++i) {
    const int w = dim(rng), h = dim(rng);
    const WindowDims win{std::uniform_int_distribution<int>(1, w)(rng), std::uniform_int_distribution<int>(1, h)(rng)};
    if (i % 2 == 0) {
      expect_box_sum_matches(oracle::random_plane<std::uint8_t>(rng, w, h, 0, 1), win, 0.0);
    } else {
      expect_box_sum_matches(oracle::random_plane<float>(rng, w, h, 0.f, 1.f), win, 1e-6);
    }
  }
}

TEST(BoxSum, IsLinear) {
  std::mt19937_64 rng(79);
  const auto a = oracle::random_plane<double>(rng, 50, 40, 0.0, 1.0);
  const auto b = oracle::random_plane<double>(rng, 50, 40, 0.0, 1.0);
  Plane<double> c(50, 40, 1.0);
  for (std::size_t i = 0; i < c.size(); ++i) c.values()[i] = 2.5 * a.values()[i] + 0.75 * b.values()[i];
  const WindowDims win{9, 13};
  const auto sa = box_sum(a, win), sb = box_sum(b, win), sc = box_sum(c, win);
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!is_defined(sc.values()[i])) continue;
    EXPECT_NEAR(sc.values()[i], 2.5 * sa.values()[i] + 0.75 * sb.values()[i], 1e-9);
  }
}

TEST(BoxSum, WindowLargerThanMap) {
  EXPECT_THROW(box_sum(Plane<float>(10, 10, 1.0), WindowDims{11, 2}), GeometryError);
}

DetectorSpec fullres_spec(double radius) {
  DetectorSpec s;
  s.disc_radius_px = radius;
  return s;
}

TEST(EstimateMc, ZeroMapIsZero) {
  const SegMap m(60, 50, 1.0, 0.0f);
  const auto e = estimate_mc_map(m, WindowDims{20, 15}, 5.0);
  for (double v : e.values())
    if (is_defined(v)) EXPECT_EQ(v, 0.0);
}

TEST(EstimateMc, SingleDiscCountsAsOne) {
  const Rect tile{0, 0, 400, 300};
  for (double r : {8.0, 12.5, 25.0}) {
    const auto seg = oracle_detect(tile, {{200, 150}}, fullres_spec(r), 1.0);
    const auto e = estimate_mc_map(seg, WindowDims{120, 90}, r);
    const double v = e(200, 150);
    EXPECT_GE(v, 0.95) << r;
    EXPECT_LE(v, 1.05) << r;
    EXPECT_NEAR(v, oracle::disc_pixel_count(r) / (std::numbers::pi * r * r), 1e-6);
  }
}

TEST(EstimateMc, SeparatedDiscsAddUp) {
  std::mt19937_64 rng(83);
  const Rect tile{0, 0, 1000, 800};
  std::vector<Point> pts;
  for (int gy = 0; gy < 6; ++gy)
    for (int gx = 0; gx < 8; ++gx) pts.push_back({100 + gx * 110, 100 + gy * 110});
  std::shuffle(pts.begin(), pts.end(), rng);
  for (std::size_t k : {1u, 5u, 17u, 48u}) {
    std::vector<Point> sub(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(k));
    const auto seg = oracle_detect(tile, sub, fullres_spec(25.0), 1.0);
    const double est = estimate_mc_map(seg, WindowDims{999, 799}, 25.0)(499, 399);
    EXPECT_LE(std::abs(est - static_cast<double>(k)), 0.05 * k) << k;
  }
}

DensityMap random_density(std::mt19937_64& rng, int w, int h) {
  auto p = oracle::random_plane<double>(rng, w, h, 0.0, 100.0);
  return p;
}

TEST(Propose, SingleValidPosition) {
  std::mt19937_64 rng(89);
  const auto m = random_density(rng, 20, 15);
  BinaryMask v(20, 15, 1.0, 0);
  v(3, 9) = 1;
  const ProposalGeometry g{16, 320, 240, WindowDims{64, 48}};
  const auto p = propose_foi(m, v, g);
  EXPECT_EQ(p.map_x, 3);
  EXPECT_EQ(p.map_y, 9);
  EXPECT_EQ(p.rect, centered_window(3 * 16 + 8, 9 * 16 + 8, WindowDims{64, 48}));
}

TEST(Propose, UniqueMaximumMatchesExhaustiveScan) {
  std::mt19937_64 rng(97);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m = random_density(rng, 40, 30);
    const BinaryMask v(40, 30, 1.0, 1);
    const ProposalGeometry g{4, 160, 120, WindowDims{20, 16}};
    const auto p = propose_foi(m, v, g);
    int bx = 0, by = 0;
    for (int y = 0; y < 30; ++y)
      for (int x = 0; x < 40; ++x)
        if (m(x, y) > m(bx, by)) bx = x, by = y;
    EXPECT_EQ(p.map_x, bx);
    EXPECT_EQ(p.map_y, by);
    EXPECT_EQ(p.estimated_mc, m(bx, by));
    EXPECT_TRUE(fits(p.rect, 160, 120));
    EXPECT_EQ(p.rect.w, 20);
    EXPECT_EQ(p.rect.h, 16);
  }
}

TEST(Propose, EmptyValidMask) {
  std::mt19937_64 rng(101);
  const auto m = random_density(rng, 10, 10);
  EXPECT_THROW(propose_foi(m, BinaryMask(10, 10, 1.0, 0), ProposalGeometry{1, 10, 10, WindowDims{3, 3}}),
               EmptyValidMaskError);
  // Valid but undefined everywhere is just as empty.
  const DensityMap undef(10, 10, 1.0, kUndefined);
  EXPECT_THROW(propose_foi(undef, BinaryMask(10, 10, 1.0, 1), ProposalGeometry{1, 10, 10, WindowDims{3, 3}}),
               EmptyValidMaskError);
}

TEST(Propose, InvariantUnderPositiveScaling) {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 30; ++trial) {
    auto m = random_density(rng, 25, 20);
    BinaryMask v(25, 20, 1.0);
    std::bernoulli_distribution on(0.3);
    for (auto& b : v.values()) b = on(rng) ? 1 : 0;
    v(0, 0) = 1;
    const ProposalGeometry g{2, 50, 40, WindowDims{10, 8}};
    const auto p = propose_foi(m, v, g);
    for (double& x : m.values()) x *= 3.7;
    const auto q = propose_foi(m, v, g);
    EXPECT_EQ(p.map_x, q.map_x);
    EXPECT_EQ(p.map_y, q.map_y);
  }
}

TEST(Propose, RestrictingTheMaskNeverRaisesTheMaximum) {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_density(rng, 25, 20);
    BinaryMask big(25, 20, 1.0);
    std::bernoulli_distribution on(0.6), keep(0.5);
    for (auto& b : big.values()) b = on(rng) ? 1 : 0;
    big(5, 5) = 1;
    BinaryMask small = big;
    for (auto& b : small.values()) b = b && keep(rng) ? 1 : 0;
    small(5, 5) = 1;
    const ProposalGeometry g{1, 25, 20, WindowDims{5, 5}};
    EXPECT_LE(propose_foi(m, small, g).estimated_mc, propose_foi(m, big, g).estimated_mc);
  }
}

TEST(Propose, RectIsClampedIntoTheSlide) {
  DensityMap m(10, 10, 1.0, 0.0);
  m(0, 0) = 5.0;
  const auto p = propose_foi(m, BinaryMask(10, 10, 1.0, 1), ProposalGeometry{10, 100, 100, WindowDims{40, 30}});
  EXPECT_EQ(p.rect, (Rect{0, 0, 40, 30}));
}

TEST(AlignMask, NearestNeighbourOnFullResCenters) {
  // 32x mask cell k covers full-res [32k, 32k+32); 16x pixel j is centered at 16j+8.
  BinaryMask coarse(3, 2, 32.0, std::vector<std::uint8_t>{1, 0, 1, 0, 1, 0});
  const auto fine = align_mask(coarse, 32, 16, 6, 4, 16.0);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 6; ++x) EXPECT_EQ(fine(x, y), coarse(x / 2, y / 2));
}

}  // namespace
}  // namespace foi
