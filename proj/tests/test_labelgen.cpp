#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "lomo/error.hpp"
#include "lomo/labelgen.hpp"
#include "lomo/scene.hpp"
#include "support.hpp"

namespace {

using lomo::geom::ArbPolygon;
using lomo::geom::Point;
using lomo::geom::Quadrangle;
namespace labelgen = lomo::labelgen;
namespace lt = lomo::testing;

TEST(DrLabels, EmptyScene) {
  const auto labels = labelgen::make_dr_labels({}, 64, 32);
  EXPECT_EQ(labels.score.width(), 16);
  EXPECT_EQ(labels.score.height(), 8);
  for (double v : labels.score.values()) EXPECT_EQ(v, 0.0);
  for (double v : labels.weight.values()) EXPECT_EQ(v, 1.0);
  for (int o : labels.owner) EXPECT_EQ(o, -1);
}

TEST(DrLabels, WeightFollowsShorterSide) {
  const std::vector<Quadrangle> gt{Quadrangle::rect(64, 64, 192, 96)};
  const auto labels = labelgen::make_dr_labels(gt, 256, 256);
  int positives = 0;
  for (std::size_t i = 0; i < labels.score.size(); ++i) {
    if (labels.score.values()[i] == 1.0) {
      ++positives;
      EXPECT_DOUBLE_EQ(labels.weight.values()[i], 2.0);
    } else {
      EXPECT_DOUBLE_EQ(labels.weight.values()[i], 1.0);
    }
  }
  EXPECT_GT(positives, 0);
}

TEST(DrLabels, OffsetIsCornerMinusCellCenter) {
  labelgen::DrLabelParams params;
  params.shrink_ratio = 0.0;
  const std::vector<Quadrangle> gt{Quadrangle::rect(4, 2, 40, 30)};
  const auto labels = labelgen::make_dr_labels(gt, 64, 64, params);
  // Cell (2, 2) is centered at (10, 10).
  ASSERT_EQ(labels.score.at(2, 2), 1.0);
  EXPECT_DOUBLE_EQ(labels.offsets[0].at(2, 2), -6.0);
  EXPECT_DOUBLE_EQ(labels.offsets[1].at(2, 2), -8.0);
  EXPECT_DOUBLE_EQ(labels.offsets[4].at(2, 2), 30.0);
  EXPECT_DOUBLE_EQ(labels.offsets[5].at(2, 2), 20.0);
}

TEST(DrLabels, PositivesLieInShrunkQuad) {
  const auto q = Quadrangle::from_points({Point{40, 30}, {200, 50}, {190, 110}, {30, 90}});
  const std::vector<Quadrangle> gt{q};
  const auto labels = labelgen::make_dr_labels(gt, 256, 160);
  const auto shrunk = lomo::geom::shrink_quadrangle(q, 0.3);
  const std::vector<Point> poly(shrunk.vertices().begin(), shrunk.vertices().end());
  for (int r = 0; r < labels.score.height(); ++r)
    for (int c = 0; c < labels.score.width(); ++c) {
      const Point center{(c + 0.5) * 4, (r + 0.5) * 4};
      EXPECT_EQ(labels.score.at(c, r) == 1.0, lt::inside(center, poly)) << c << "," << r;
    }
}

TEST(DrLabels, OverlapGoesToSmallerQuad) {
  const std::vector<Quadrangle> gt{Quadrangle::rect(0, 0, 200, 200), Quadrangle::rect(80, 80, 120, 120)};
  const auto labels = labelgen::make_dr_labels(gt, 200, 200);
  const std::size_t center = labels.score.index(25, 25);  // (102, 102)
  EXPECT_EQ(labels.owner[center], 1);
  EXPECT_DOUBLE_EQ(labels.offsets[0].values()[center], 80.0 - 102.0);
  EXPECT_EQ(labels.owner[labels.score.index(17, 25)], 0);  // (70, 102)
}

TEST(DrLabels, DecodingPositiveCellsRecoversCorners) {
  const auto scene = lomo::pipeline::generate_scene(9, lomo::pipeline::SceneSpec{});
  const auto& labels = scene.dr;
  const auto gts = scene.scene.gt_quads();
  for (int r = 0; r < labels.score.height(); ++r)
    for (int c = 0; c < labels.score.width(); ++c) {
      const std::size_t idx = labels.score.index(c, r);
      if (labels.owner[idx] < 0) continue;
      const auto& q = gts[static_cast<std::size_t>(labels.owner[idx])];
      const Point center{(c + 0.5) * 4, (r + 0.5) * 4};
      for (std::size_t v = 0; v < 4; ++v) {
        EXPECT_NEAR(center.x + labels.offsets[2 * v].values()[idx], q[v].x, 1e-9);
        EXPECT_NEAR(center.y + labels.offsets[2 * v + 1].values()[idx], q[v].y, 1e-9);
      }
    }
}

TEST(DrLabels, WeightLowerBound) {
  const std::vector<Quadrangle> gt{Quadrangle::rect(8, 8, 208, 208), Quadrangle::rect(220, 10, 250, 30)};
  const auto labels = labelgen::make_dr_labels(gt, 256, 256);
  double min_w = 1e9;
  for (double w : labels.weight.values()) min_w = std::min(min_w, w);
  EXPECT_GE(min_w, std::min(1.0, 64.0 / 200.0) - 1e-12);
  EXPECT_GT(min_w, 0.0);
}

TEST(DrLabels, RejectsIndivisibleCanvas) {
  EXPECT_THROW(labelgen::make_dr_labels({}, 63, 64), lomo::ValidationError);
}

TEST(SemLabels, StraightRectOffsets) {
  const auto gt = Quadrangle::rect(10, 20, 110, 40).to_polygon();
  const auto labels = labelgen::make_sem_labels(gt, 128, 64, 4);
  int tcl = 0;
  for (int r = 0; r < 16; ++r)
    for (int c = 0; c < 32; ++c) {
      if (labels.center_line.at(c, r) != 1.0) continue;
      ++tcl;
      EXPECT_EQ(r, 7);  // the only row centered on y = 30
      EXPECT_NEAR(labels.border_offsets[0].at(c, r), 0.0, 1e-9);
      EXPECT_NEAR(labels.border_offsets[1].at(c, r), -10.0, 1e-9);
      EXPECT_NEAR(labels.border_offsets[2].at(c, r), 0.0, 1e-9);
      EXPECT_NEAR(labels.border_offsets[3].at(c, r), 10.0, 1e-9);
    }
  // Spine 100 px shrunk by 10% per side leaves x in [20, 100]: 20 cells.
  EXPECT_EQ(tcl, 20);
}

std::vector<Point> arc_spine(Point center, double radius, double from, double to, int steps) {
  std::vector<Point> out;
  for (int i = 0; i <= steps; ++i) {
    const double a = from + (to - from) * i / steps;
    out.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return out;
}

TEST(SemLabels, SemicircleOffsetsSpanThickness) {
  // Upper half of a circle traversed left to right (y points down).
  const double t = 24.0;
  const auto spine = arc_spine({128, 150}, 80, std::numbers::pi, 2 * std::numbers::pi, 400);
  const auto gt = lomo::pipeline::tube_polygon(spine, t, 64);
  const auto labels = labelgen::make_sem_labels(gt, 256, 256, 4);
  int tcl = 0;
  for (int r = 0; r < 64; ++r)
    for (int c = 0; c < 64; ++c) {
      if (labels.center_line.at(c, r) != 1.0) continue;
      ++tcl;
      const Point up{labels.border_offsets[0].at(c, r), labels.border_offsets[1].at(c, r)};
      const Point down{labels.border_offsets[2].at(c, r), labels.border_offsets[3].at(c, r)};
      EXPECT_NEAR(lomo::geom::norm(up) + lomo::geom::norm(down), t, 0.5);
      // Cells sit within the TCL half width (3 px) of the spine.
      EXPECT_NEAR(lomo::geom::norm(up), t / 2, 3.5);
      EXPECT_NEAR(lomo::geom::norm(down), t / 2, 3.5);
    }
  EXPECT_GT(tcl, 50);
}

TEST(SemLabels, CenterLineInsideTextRegion) {
  std::mt19937_64 rng(4);
  const auto spec = lt::round_trip_spec();
  for (int i = 0; i < 20; ++i) {
    const auto kind = static_cast<lomo::pipeline::TextKind>(i % 4);
    const auto inst = lomo::pipeline::random_instance(kind, rng, spec);
    const auto labels = labelgen::make_sem_labels(inst.gt_polygon, spec.width, spec.height, 4);
    for (std::size_t k = 0; k < labels.center_line.size(); ++k) {
      const double tcl = labels.center_line.values()[k];
      EXPECT_TRUE(tcl == 0.0 || tcl == 1.0);
      if (tcl == 1.0) EXPECT_EQ(labels.text_region.values()[k], 1.0);
      if (tcl == 0.0)
        for (const auto& m : labels.border_offsets) EXPECT_EQ(m.values()[k], 0.0);
    }
  }
}

TEST(SemLabels, RoiFrameMatchesImageGridShape) {
  const auto gt = Quadrangle::rect(10, 20, 110, 40).to_polygon();
  const auto frame = lomo::GridFrame::roi(Quadrangle::rect(10, 20, 110, 40), 32, 256);
  const auto labels = labelgen::make_sem_labels(gt, frame, 256, 32);
  // Aspect 5 in a 32-row block uses 160 columns.
  for (int r = 0; r < 32; ++r) {
    for (int c = 0; c < 160; ++c) EXPECT_EQ(labels.text_region.at(c, r), 1.0);
    for (int c = 160; c < 256; ++c) EXPECT_EQ(labels.text_region.at(c, r), 0.0);
  }
}

TEST(SemLabels, Validation) {
  const auto gt = Quadrangle::rect(10, 20, 110, 40).to_polygon();
  labelgen::SemLabelParams bad;
  bad.line_shrink = 0.5;
  EXPECT_THROW(labelgen::make_sem_labels(gt, 128, 64, 4, bad), lomo::ValidationError);
  EXPECT_THROW(labelgen::make_sem_labels(gt, 130, 64, 4), lomo::ValidationError);
  const ArbPolygon collapsed({{5, 5}, {5, 5}, {5, 15}, {5, 15}});
  EXPECT_THROW(labelgen::make_sem_labels(collapsed, 128, 64, 4), lomo::DegenerateShape);
}

TEST(Spine, ProjectionOnStraightSpine) {
  const auto gt = Quadrangle::rect(0, 0, 100, 20).to_polygon();
  const labelgen::Spine spine(gt);
  EXPECT_DOUBLE_EQ(spine.length(), 100.0);
  const auto p = spine.project({30, 4});
  EXPECT_NEAR(p.arc, 30.0, 1e-12);
  EXPECT_NEAR(p.distance, 6.0, 1e-12);
  EXPECT_NEAR(p.height, 20.0, 1e-12);
  EXPECT_NEAR(p.tangent.x, 1.0, 1e-12);
}

TEST(BorderHit, ClampsWhenNormalMisses) {
  const std::vector<Point> border{{0, 0}, {10, 0}};
  const Point hit = labelgen::border_hit({5, 5}, {0, -1}, border);
  EXPECT_NEAR(hit.x, 5.0, 1e-12);
  EXPECT_NEAR(hit.y, 0.0, 1e-12);
  const Point miss = labelgen::border_hit({20, 5}, {0, -1}, border);
  EXPECT_NEAR(miss.x, 10.0, 1e-12);
  EXPECT_NEAR(miss.y, 0.0, 1e-12);
}

}  // namespace
