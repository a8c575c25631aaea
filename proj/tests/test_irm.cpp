#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "lomo/error.hpp"
#include "lomo/irm.hpp"
#include "support.hpp"

namespace {

using lomo::geom::Point;
using lomo::geom::Proposal;
using lomo::geom::Quadrangle;
namespace irm = lomo::irm;
namespace lt = lomo::testing;

TEST(RoiTransform, AffineSpecialCase) {
  // 640 x 80 has the block's own 8:1 aspect, so every cell is used.
  const auto g = irm::roi_transform_grid(Quadrangle::rect(0, 0, 640, 80), 8, 64);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 64; ++c) {
      const std::size_t i = static_cast<std::size_t>(r * 64 + c);
      ASSERT_TRUE(g.valid[i]);
      EXPECT_NEAR(g.points[i].x, (c + 0.5) * 10, 1e-9);
      EXPECT_NEAR(g.points[i].y, (r + 0.5) * 10, 1e-9);
    }
}

TEST(RoiTransform, SquareKeepsAspect) {
  const auto g = irm::roi_transform_grid(Quadrangle::rect(0, 0, 1, 1), 8, 64);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 64; ++c) EXPECT_EQ(g.valid[static_cast<std::size_t>(r * 64 + c)] != 0, c < 8);
}

TEST(RoiTransform, CornerCellsNearQuadCorners) {
  const auto q = Quadrangle::from_points({Point{20, 30}, {300, 10}, {320, 60}, {10, 70}});
  const auto g = irm::roi_transform_grid(q, 8, 64);
  const int w = g.layout.used_w, h = g.layout.used_h;
  const std::array<std::size_t, 4> cells{0, static_cast<std::size_t>(w - 1),
                                         static_cast<std::size_t>((h - 1) * 64 + w - 1),
                                         static_cast<std::size_t>((h - 1) * 64)};
  // Corner cell centers sit within one cell of the quad corners.
  const double cell = std::max(q.mean_width() / w, q.mean_height() / h);
  for (std::size_t k = 0; k < 4; ++k)
    EXPECT_LT(lomo::geom::distance(g.points[cells[k]], q[k]), cell * std::sqrt(2.0));
}

TEST(RoiTransform, InverseRecoversCells) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    std::array<Point, 4> pts{Point{lt::uniform(rng, 0, 30), lt::uniform(rng, 0, 30)},
                             {lt::uniform(rng, 200, 300), lt::uniform(rng, 0, 30)},
                             {lt::uniform(rng, 200, 300), lt::uniform(rng, 60, 90)},
                             {lt::uniform(rng, 0, 30), lt::uniform(rng, 60, 90)}};
    const auto q = Quadrangle::from_points(pts);
    const auto g = irm::roi_transform_grid(q, 8, 64);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 64; ++c) {
        const std::size_t i = static_cast<std::size_t>(r * 64 + c);
        if (!g.valid[i]) continue;
        const Point back = g.layout.image_to_cell(g.points[i]);
        EXPECT_NEAR(back.x, c, 1e-6);
        EXPECT_NEAR(back.y, r, 1e-6);
      }
  }
}

TEST(RoiTransform, RejectsZeroArea) {
  EXPECT_THROW(Quadrangle::from_points({Point{0, 0}, {1, 0}, {2, 0}, {3, 0}}), lomo::DegenerateShape);
}

irm::SampleGrid points_grid(std::vector<Point> pts) {
  irm::SampleGrid g;
  g.height = 1;
  g.width = static_cast<int>(pts.size());
  g.points = std::move(pts);
  g.valid.assign(g.points.size(), 1);
  return g;
}

TEST(BilinearSample, ConstantLatticeAndMidpoint) {
  irm::FeatureGrid constant(2, 4, 5, 3.25);
  const auto out = irm::bilinear_sample(constant, points_grid({{0.3, 1.7}, {3.9, 2.2}, {2, 2}}));
  for (double v : out.values) EXPECT_DOUBLE_EQ(v, 3.25);

  irm::FeatureGrid f(1, 2, 2);
  f.at(0, 0, 0) = 1.0;
  f.at(0, 0, 1) = 3.0;
  f.at(0, 1, 0) = 5.0;
  const auto s = irm::bilinear_sample(f, points_grid({{0, 0}, {1, 0}, {0.5, 0}, {0, 1}}));
  EXPECT_DOUBLE_EQ(s.at(0, 0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s.at(0, 0, 1), 3.0);
  EXPECT_DOUBLE_EQ(s.at(0, 0, 2), 2.0);
  EXPECT_DOUBLE_EQ(s.at(0, 0, 3), 5.0);
}

TEST(BilinearSample, OutsideAndInvalidGiveZero) {
  irm::FeatureGrid f(1, 3, 3, 1.0);
  auto g = points_grid({{-0.5, 1}, {1, 2.5}, {1, 1}});
  g.valid[2] = 0;
  const auto s = irm::bilinear_sample(f, g);
  for (double v : s.values) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(FeatureCoords, CellCentersMapToIntegers) {
  const auto g = irm::to_feature_coords(points_grid({{2, 2}, {6, 10}}), 4.0);
  EXPECT_DOUBLE_EQ(g.points[0].x, 0.0);
  EXPECT_DOUBLE_EQ(g.points[1].x, 1.0);
  EXPECT_DOUBLE_EQ(g.points[1].y, 2.0);
}

irm::FeatureGrid random_features(std::mt19937_64& rng, int c, int h, int w) {
  irm::FeatureGrid f(c, h, w);
  for (double& v : f.values) v = lt::uniform(rng, -1, 1);
  return f;
}

irm::CornerAttention uniform_attention(int h, int w, double value) {
  irm::CornerAttention m;
  m.height = h;
  m.width = w;
  for (auto& map : m.maps) map.assign(static_cast<std::size_t>(h * w), value);
  return m;
}

TEST(CornerAggregate, UniformOneHotAndNull) {
  std::mt19937_64 rng(6);
  const auto f = random_features(rng, 3, 8, 64);
  const auto mean = irm::corner_aggregate(f, uniform_attention(8, 64, 1.0 / (8 * 64)));
  for (int c = 0; c < 3; ++c) {
    double s = 0.0;
    for (int h = 0; h < 8; ++h)
      for (int w = 0; w < 64; ++w) s += f.at(c, h, w);
    for (const auto& fc : mean) EXPECT_NEAR(fc[static_cast<std::size_t>(c)], s / (8 * 64), 1e-12);
  }

  auto hot = uniform_attention(8, 64, 0.0);
  hot.maps[2][static_cast<std::size_t>(5 * 64 + 17)] = 1.0;
  const auto picked = irm::corner_aggregate(f, hot);
  for (int c = 0; c < 3; ++c) {
    EXPECT_DOUBLE_EQ(picked[2][static_cast<std::size_t>(c)], f.at(c, 5, 17));
    EXPECT_DOUBLE_EQ(picked[0][static_cast<std::size_t>(c)], 0.0);
  }
}

TEST(CornerAggregate, LinearInBothArguments) {
  std::mt19937_64 rng(7);
  const auto f1 = random_features(rng, 4, 8, 64);
  const auto f2 = random_features(rng, 4, 8, 64);
  const auto layout = lomo::geom::RoiLayout::fit(Quadrangle::rect(0, 0, 300, 50), 8, 64);
  const auto m1 = irm::gaussian_corner_attention(layout, 1.5);
  const auto m2 = irm::gaussian_corner_attention(layout, 3.0);
  irm::FeatureGrid fsum = f1;
  for (std::size_t i = 0; i < fsum.values.size(); ++i) fsum.values[i] = 2.0 * f1.values[i] - f2.values[i];
  irm::CornerAttention msum = m1;
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t i = 0; i < msum.maps[k].size(); ++i) msum.maps[k][i] = m1.maps[k][i] + 3.0 * m2.maps[k][i];

  const auto a = irm::corner_aggregate(fsum, m1);
  const auto a1 = irm::corner_aggregate(f1, m1), a2 = irm::corner_aggregate(f2, m1);
  const auto b = irm::corner_aggregate(f1, msum);
  const auto b2 = irm::corner_aggregate(f1, m2);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t c = 0; c < 4; ++c) {
      EXPECT_NEAR(a[k][c], 2.0 * a1[k][c] - a2[k][c], 1e-10);
      EXPECT_NEAR(b[k][c], a1[k][c] + 3.0 * b2[k][c], 1e-10);
    }
}

TEST(CornerAggregate, DimMismatch) {
  EXPECT_THROW(irm::corner_aggregate(irm::FeatureGrid(1, 8, 64), uniform_attention(8, 32, 1.0)),
               lomo::DimMismatch);
}

TEST(GaussianAttention, PeaksAtUsedCorners) {
  const auto layout = lomo::geom::RoiLayout::fit(Quadrangle::rect(0, 0, 100, 50), 8, 64);
  const auto m = irm::gaussian_corner_attention(layout, 1.5);
  ASSERT_EQ(layout.used_w, 16);
  EXPECT_DOUBLE_EQ(m.maps[0][0], 1.0);
  EXPECT_DOUBLE_EQ(m.maps[1][15], 1.0);
  EXPECT_DOUBLE_EQ(m.maps[2][7 * 64 + 15], 1.0);
  EXPECT_DOUBLE_EQ(m.maps[3][7 * 64], 1.0);
  for (const auto& map : m.maps)
    for (std::size_t i = 0; i < map.size(); ++i) {
      EXPECT_GE(map[i], 0.0);
      EXPECT_LE(map[i], 1.0);
      if (i % 64 >= 16) EXPECT_EQ(map[i], 0.0);
    }
}

TEST(CornerOffsets, ZeroTranslateAndInverse) {
  const auto q = Quadrangle::from_points({Point{20, 30}, {300, 10}, {320, 60}, {10, 70}});
  EXPECT_EQ(irm::apply_corner_offsets(q, {}), q);
  const auto moved = irm::apply_corner_offsets(q, {5, 0, 5, 0, 5, 0, 5, 0});
  for (int k = 0; k < 4; ++k) EXPECT_EQ(moved[k], (q[k] + Point{5, 0}));
  const auto gt = Quadrangle::from_points({Point{25, 28}, {310, 15}, {318, 66}, {12, 72}});
  EXPECT_EQ(irm::apply_corner_offsets(q, irm::make_offset_targets(q, gt)), gt);
  EXPECT_THROW(irm::apply_corner_offsets(q, {0, 0, -300, 0, -300, 0, 0, 0}), lomo::DegenerateShape);
}

TEST(OffsetTargets, IdentityAndTranslation) {
  const auto q = Quadrangle::rect(10, 10, 50, 30);
  for (double v : irm::make_offset_targets(q, q)) EXPECT_EQ(v, 0.0);
  const auto t = irm::make_offset_targets(q, Quadrangle::rect(13, 8, 53, 28));
  for (int k = 0; k < 4; ++k) {
    EXPECT_DOUBLE_EQ(t[2 * k], 3.0);
    EXPECT_DOUBLE_EQ(t[2 * k + 1], -2.0);
  }
}

// Near-square proposals against a copy rotated by a quarter turn plus jitter:
// the canonical correspondence must agree with the cyclic shift of least
// total corner distance.
TEST(OffsetTargets, MatchesBestCyclicShift) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    const Point c{100, 100};
    const double tilt = lt::uniform(rng, -0.5, 0.5);
    std::array<Point, 4> p, g;
    for (int k = 0; k < 4; ++k) {
      const double a = tilt + (k - 2.5) * std::numbers::pi / 2;
      const double r = 40 + lt::uniform(rng, -2, 2);
      p[k] = {c.x + r * std::cos(a), c.y + r * std::sin(a)};
      const double b = a + std::numbers::pi / 2 + lt::uniform(rng, -0.05, 0.05);
      g[k] = {c.x + r * std::cos(b) + lt::uniform(rng, -1, 1), c.y + r * std::sin(b)};
    }
    const auto prop = Quadrangle::from_points(p);
    const auto gt = Quadrangle::from_points(g);
    double best = 1e300;
    int best_shift = 0;
    for (int s = 0; s < 4; ++s) {
      double d = 0;
      for (int k = 0; k < 4; ++k) d += lomo::geom::distance(prop[k], gt[(k + s) % 4]);
      if (d < best) best = d, best_shift = s;
    }
    const auto targets = irm::make_offset_targets(prop, gt);
    for (int k = 0; k < 4; ++k) {
      const Point want = gt[(k + best_shift) % 4] - prop[k];
      EXPECT_NEAR(targets[2 * k], want.x, 1e-9);
      EXPECT_NEAR(targets[2 * k + 1], want.y, 1e-9);
    }
  }
}

class ScaledGtPredictor : public irm::OffsetPredictor {
 public:
  ScaledGtPredictor(Quadrangle gt, double fraction) : gt_(gt), fraction_(fraction) {}
  irm::Offsets8 predict(const Quadrangle& quad, const irm::FeatureGrid&) const override {
    auto o = irm::make_offset_targets(quad, gt_);
    for (double& v : o) v *= fraction_;
    return o;
  }

 private:
  Quadrangle gt_;
  double fraction_;
};

double corner_error(const Quadrangle& a, const Quadrangle& b) {
  double s = 0;
  for (int k = 0; k < 4; ++k) s += lomo::geom::distance(a[k], b[k]);
  return s / 4;
}

TEST(Refine, ZeroTimesIsIdentity) {
  const std::vector<Proposal> in{{Quadrangle::rect(0, 0, 50, 10), 0.8}};
  const ScaledGtPredictor pred(Quadrangle::rect(0, 0, 60, 12), 1.0);
  const auto out = irm::refine(in, pred, irm::FeatureGrid(), 0);
  EXPECT_EQ(out[0].quad, in[0].quad);
  EXPECT_THROW(irm::refine(in, pred, irm::FeatureGrid(), -1), lomo::ValidationError);
}

TEST(Refine, OracleConvergesInOneStep) {
  const auto gt = Quadrangle::from_points({Point{25, 28}, {310, 15}, {318, 66}, {12, 72}});
  const std::vector<Proposal> in{{Quadrangle::from_points({Point{30, 30}, {200, 20}, {210, 60}, {20, 70}}), 0.9}};
  const ScaledGtPredictor pred(gt, 1.0);
  for (int rt = 1; rt <= 3; ++rt) {
    const auto out = irm::refine(in, pred, irm::FeatureGrid(), rt);
    EXPECT_NEAR(lomo::geom::polygon_iou(out[0].quad, gt), 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(out[0].score, 0.9);
  }
}

TEST(Refine, HalfOracleContracts) {
  const auto gt = Quadrangle::from_points({Point{25, 28}, {310, 15}, {318, 66}, {12, 72}});
  const auto start = Quadrangle::from_points({Point{30, 30}, {200, 20}, {210, 60}, {20, 70}});
  const std::vector<Proposal> in{{start, 0.9}};
  const ScaledGtPredictor pred(gt, 0.5);
  const double e0 = corner_error(start, gt);
  double prev = e0;
  for (int rt = 1; rt <= 4; ++rt) {
    const double e = corner_error(irm::refine(in, pred, irm::FeatureGrid(), rt)[0].quad, gt);
    EXPECT_LT(e, prev);
    prev = e;
    if (rt == 2) EXPECT_NEAR(e, 0.25 * e0, 1e-9);
  }
}

class CollapsingPredictor : public irm::OffsetPredictor {
 public:
  irm::Offsets8 predict(const Quadrangle& quad, const irm::FeatureGrid&) const override {
    irm::Offsets8 o{};
    // Pull every corner onto corner 0.
    for (int k = 0; k < 4; ++k) {
      o[2 * k] = quad[0].x - quad[k].x;
      o[2 * k + 1] = quad[0].y - quad[k].y;
    }
    return o;
  }
};

TEST(Refine, DegenerateStepKeepsLastValid) {
  const std::vector<Proposal> in{{Quadrangle::rect(0, 0, 50, 10), 0.8},
                                 {Quadrangle::rect(60, 0, 90, 10), 0.7}};
  irm::RefineStats stats;
  const auto out = irm::refine(in, CollapsingPredictor(), irm::FeatureGrid(), 2, &stats);
  EXPECT_EQ(out[0].quad, in[0].quad);
  EXPECT_EQ(out[1].quad, in[1].quad);
  EXPECT_EQ(stats.degenerate_steps, 4u);
}

}  // namespace
