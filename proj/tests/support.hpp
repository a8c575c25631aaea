#pragma once

// Independent oracles and generators shared by the unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "lomo/frame.hpp"
#include "lomo/geom.hpp"
#include "lomo/labelgen.hpp"
#include "lomo/loss.hpp"
#include "lomo/scene.hpp"
#include "lomo/sem.hpp"

namespace lomo::testing {

using geom::Point;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Star-shaped (hence simple) polygon around `center` with `k` vertices,
/// positively oriented. Radii vary enough to make most of them non-convex.
inline std::vector<Point> random_star(std::mt19937_64& rng, Point center, double r_min,
                                      double r_max, int k) {
  // Every edge must subtend less than a half turn, otherwise the polygon is
  // not star-shaped about `center` and may self-intersect.
  std::vector<double> angles;
  for (bool ok = false; !ok;) {
    angles.clear();
    for (int i = 0; i < k; ++i) angles.push_back(uniform(rng, 0.0, 2.0 * std::numbers::pi));
    std::sort(angles.begin(), angles.end());
    ok = angles.front() + 2.0 * std::numbers::pi - angles.back() < 0.9 * std::numbers::pi;
    for (std::size_t i = 1; i < angles.size(); ++i)
      ok = ok && angles[i] - angles[i - 1] < 0.9 * std::numbers::pi;
  }
  std::vector<Point> out;
  for (double a : angles) {
    const double r = uniform(rng, r_min, r_max);
    out.push_back({center.x + r * std::cos(a), center.y + r * std::sin(a)});
  }
  return out;
}

/// Even-odd ray casting, written independently of the library version.
inline bool inside(Point p, const std::vector<Point>& poly) {
  bool in = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      in = !in;
  }
  return in;
}

/// Stratified jittered Monte-Carlo IoU over the joint bounding box with
/// side x side samples.
inline double monte_carlo_iou(const std::vector<Point>& a, const std::vector<Point>& b, int side,
                              std::mt19937_64& rng) {
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto* poly : {&a, &b})
    for (Point p : *poly) {
      x0 = std::min(x0, p.x);
      y0 = std::min(y0, p.y);
      x1 = std::max(x1, p.x);
      y1 = std::max(y1, p.y);
    }
  const double dx = (x1 - x0) / side, dy = (y1 - y0) / side;
  std::uniform_real_distribution<double> jitter(0.0, 1.0);
  long both = 0, either = 0;
  for (int r = 0; r < side; ++r) {
    for (int c = 0; c < side; ++c) {
      const Point p{x0 + (c + jitter(rng)) * dx, y0 + (r + jitter(rng)) * dy};
      const bool ia = inside(p, a), ib = inside(p, b);
      both += ia && ib;
      either += ia || ib;
    }
  }
  return either == 0 ? 0.0 : static_cast<double>(both) / static_cast<double>(either);
}

/// Central-difference gradient of `f` at `x`.
inline std::vector<double> numeric_gradient(const std::function<double(const std::vector<double>&)>& f,
                                            std::vector<double> x, double step = 1e-4) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + step;
    const double hi = f(x);
    x[i] = keep - step;
    const double lo = f(x);
    x[i] = keep;
    g[i] = (hi - lo) / (2.0 * step);
  }
  return g;
}

/// ||a - b|| / max(||a||, ||b||), 0 when both vanish.
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double scale = std::sqrt(std::max(na, nb));
  return scale == 0.0 ? 0.0 : std::sqrt(diff) / scale;
}

/// A residual that stays clear of the smooth-L1 kinks at +-1, so central
/// differences with a small step do not straddle them.
inline double residual(std::mt19937_64& rng) {
  for (;;) {
    const double d = uniform(rng, -3.0, 3.0);
    if (std::abs(std::abs(d) - 1.0) > 0.01) return d;
  }
}

inline RasterMap random_map(std::mt19937_64& rng, int w, int h, double lo, double hi) {
  RasterMap m(w, h);
  for (double& v : m.values()) v = uniform(rng, lo, hi);
  return m;
}

inline RasterMap random_mask(std::mt19937_64& rng, int w, int h, double p = 0.4) {
  RasterMap m(w, h);
  std::bernoulli_distribution coin(p);
  for (double& v : m.values()) v = coin(rng) ? 1.0 : 0.0;
  return m;
}

/// Synthetic instance spec for label round trips: thickness of 8 to 12 cells
/// at downsample 4 on a canvas large enough for the longest instances.
inline pipeline::SceneSpec round_trip_spec() {
  pipeline::SceneSpec spec;
  spec.width = 1024;
  spec.height = 1024;
  spec.downsample = 4;
  spec.min_thickness = 32.0;
  spec.max_thickness = 48.0;
  return spec;
}

/// IoU between `gt` and the polygon reconstructed from its own SEM labels on
/// the image grid; 0 if reconstruction fails.
inline double round_trip_iou(const geom::ArbPolygon& gt, int width, int height, int downsample,
                             int n) {
  const auto maps = labelgen::make_sem_labels(gt, width, height, downsample);
  sem::ReconstructParams params;
  params.n = n;
  const auto rec = sem::reconstruct(maps, GridFrame::image_grid(downsample), params);
  return rec ? geom::polygon_iou(rec->polygon, gt) : 0.0;
}

/// IoU of `gt` with the n-pair polygon obtained by sampling its own spine at
/// equal arc length and intersecting the exact normals with its borders. The
/// ceiling any reconstruction with n samples can reach.
inline double exact_resample_iou(const geom::ArbPolygon& gt, int n) {
  const labelgen::Spine spine(gt);
  const auto up = gt.upper_border();
  const auto down = gt.lower_border();
  const auto pts = spine.points();
  std::vector<double> cum{0.0};
  for (std::size_t i = 1; i < pts.size(); ++i) cum.push_back(cum.back() + geom::distance(pts[i - 1], pts[i]));
  std::vector<Point> upper, lower;
  for (int k = 0; k < n; ++k) {
    const double s = cum.back() * k / (n - 1);
    std::size_t j = 0;
    while (j + 2 < pts.size() && cum[j + 1] < s) ++j;
    const double t = (s - cum[j]) / (cum[j + 1] - cum[j]);
    const Point c = pts[j] + (pts[j + 1] - pts[j]) * t;
    const Point tangent = spine.project(c).tangent;
    const Point normal{tangent.y, -tangent.x};
    upper.push_back(labelgen::border_hit(c, normal, up));
    lower.push_back(labelgen::border_hit(c, normal, down));
  }
  return geom::polygon_iou(geom::ArbPolygon::from_borders(upper, lower), gt);
}

}  // namespace lomo::testing
