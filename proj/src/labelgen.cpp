#include "lomo/labelgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lomo/error.hpp"

namespace lomo::labelgen {

using geom::Point;

double shorter_side(const geom::Quadrangle& q) { return std::min(q.mean_width(), q.mean_height()); }

DrLabelSet make_dr_labels(std::span<const geom::Quadrangle> gt, int width, int height,
                          const DrLabelParams& params) {
  const int ds = params.downsample;
  if (ds < 1 || width % ds != 0 || height % ds != 0)
    throw ValidationError("canvas must be divisible by the downsample factor");
  if (!(params.l > 0.0)) throw ValidationError("weight constant l must be positive");
  const int gw = width / ds;
  const int gh = height / ds;

  DrLabelSet labels;
  labels.score = RasterMap(gw, gh, ds, 0.0);
  labels.weight = RasterMap(gw, gh, ds, 1.0);
  for (auto& m : labels.offsets) m = RasterMap(gw, gh, ds, 0.0);
  labels.owner.assign(labels.score.size(), -1);

  std::vector<geom::Quadrangle> shrunk;
  shrunk.reserve(gt.size());
  for (const auto& q : gt) shrunk.push_back(geom::shrink_quadrangle(q, params.shrink_ratio));

  for (int row = 0; row < gh; ++row) {
    for (int col = 0; col < gw; ++col) {
      const Point c{(col + 0.5) * ds, (row + 0.5) * ds};
      int best = -1;
      for (std::size_t k = 0; k < gt.size(); ++k) {
        if (!geom::point_in_polygon(c, shrunk[k].vertices())) continue;
        if (best < 0 || gt[k].area() < gt[static_cast<std::size_t>(best)].area())
          best = static_cast<int>(k);
      }
      if (best < 0) continue;
      const auto& quad = gt[static_cast<std::size_t>(best)];
      const std::size_t idx = labels.score.index(col, row);
      labels.owner[idx] = best;
      labels.score.values()[idx] = 1.0;
      labels.weight.values()[idx] = params.l / shorter_side(quad);
      for (std::size_t v = 0; v < 4; ++v) {
        labels.offsets[2 * v].values()[idx] = quad[v].x - c.x;
        labels.offsets[2 * v + 1].values()[idx] = quad[v].y - c.y;
      }
    }
  }
  return labels;
}

Spine::Spine(const geom::ArbPolygon& poly) {
  const std::size_t n = poly.pairs();
  for (std::size_t i = 0; i < n; ++i) {
    points_.push_back((poly.upper(i) + poly.lower(i)) * 0.5);
    heights_.push_back(geom::distance(poly.upper(i), poly.lower(i)));
  }
  cumulative_.push_back(0.0);
  for (std::size_t i = 1; i < n; ++i)
    cumulative_.push_back(cumulative_.back() + geom::distance(points_[i - 1], points_[i]));
  if (!(cumulative_.back() > 0.0)) throw DegenerateShape("text polygon has a zero-length spine");
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = points_[i == 0 ? 0 : i - 1];
    const Point b = points_[i + 1 == n ? n - 1 : i + 1];
    tangents_.push_back(geom::normalized(b - a));
  }
}

Spine::Projection Spine::project(Point p) const {
  Projection best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
    const Point a = points_[i];
    const Point b = points_[i + 1];
    const Point q = geom::closest_on_segment(p, a, b);
    const double d = geom::distance(p, q);
    if (d >= best.distance) continue;
    const double seg = geom::distance(a, b);
    const double t = seg > 0 ? geom::distance(a, q) / seg : 0.0;
    best.point = q;
    best.distance = d;
    best.arc = cumulative_[i] + t * seg;
    best.tangent = geom::normalized(tangents_[i] * (1 - t) + tangents_[i + 1] * t);
    best.height = heights_[i] * (1 - t) + heights_[i + 1] * t;
  }
  return best;
}

Point border_hit(Point origin, Point direction, std::span<const Point> border) {
  double best_alpha = std::numeric_limits<double>::infinity();
  Point hit{};
  for (std::size_t i = 0; i + 1 < border.size(); ++i) {
    const Point a = border[i];
    const Point e = border[i + 1] - a;
    const double den = geom::cross(direction, e);
    if (std::abs(den) < 1e-12) continue;
    const Point w = a - origin;
    const double alpha = geom::cross(w, e) / den;
    const double beta = geom::cross(w, direction) / den;
    if (beta < -1e-9 || beta > 1 + 1e-9) continue;
    if (std::abs(alpha) < std::abs(best_alpha)) {
      best_alpha = alpha;
      hit = origin + direction * alpha;
    }
  }
  if (std::isfinite(best_alpha)) return hit;
  // The normal misses the border polyline (high curvature near the ends):
  // clamp to the closest border point.
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < border.size(); ++i) {
    const Point q = geom::closest_on_segment(origin, border[i], border[i + 1]);
    if (geom::distance(origin, q) < best_d) {
      best_d = geom::distance(origin, q);
      hit = q;
    }
  }
  return hit;
}

SemLabelSet make_sem_labels(const geom::ArbPolygon& gt, int width, int height, int downsample,
                            const SemLabelParams& params) {
  if (downsample < 1 || width % downsample != 0 || height % downsample != 0)
    throw ValidationError("canvas must be divisible by the downsample factor");
  SemLabelSet labels = make_sem_labels(gt, GridFrame::image_grid(downsample), width / downsample,
                                       height / downsample, params);
  for (RasterMap* m : {&labels.text_region, &labels.center_line, &labels.border_offsets[0],
                       &labels.border_offsets[1], &labels.border_offsets[2],
                       &labels.border_offsets[3]}) {
    RasterMap resized(m->width(), m->height(), downsample);
    std::copy(m->values().begin(), m->values().end(), resized.values().begin());
    *m = std::move(resized);
  }
  return labels;
}

SemLabelSet make_sem_labels(const geom::ArbPolygon& gt, const GridFrame& frame, int grid_w,
                            int grid_h, const SemLabelParams& params) {
  if (gt.pairs() < 2) throw ValidationError("text polygon needs at least 2 point pairs");
  if (!(params.line_shrink >= 0.0 && params.line_shrink < 0.5))
    throw ValidationError("line_shrink must lie in [0, 0.5)");
  const Spine spine(gt);
  const auto upper = gt.upper_border();
  const auto lower = gt.lower_border();
  const double lo = params.line_shrink * spine.length();
  const double hi = spine.length() - lo;
  // Keep the line at least one cell wide so it stays 8-connected.
  const double min_half_width = 0.75 * frame.cell_size();

  SemLabelSet labels;
  labels.text_region = RasterMap(grid_w, grid_h);
  labels.center_line = RasterMap(grid_w, grid_h);
  for (auto& m : labels.border_offsets) m = RasterMap(grid_w, grid_h);

  for (int row = 0; row < grid_h; ++row) {
    for (int col = 0; col < grid_w; ++col) {
      if (!frame.in_range(col, row)) continue;
      const Point c = frame.to_image(col, row);
      if (!geom::point_in_polygon(c, gt.vertices())) continue;
      labels.text_region.at(col, row) = 1.0;

      const auto proj = spine.project(c);
      const double half_width = std::max(0.5 * params.tcl_thickness * proj.height, min_half_width);
      if (proj.arc < lo || proj.arc > hi || proj.distance > half_width) continue;

      const Point normal{-proj.tangent.y, proj.tangent.x};
      const Point up = border_hit(c, normal, upper) - c;
      const Point down = border_hit(c, normal, lower) - c;
      labels.center_line.at(col, row) = 1.0;
      labels.border_offsets[0].at(col, row) = up.x;
      labels.border_offsets[1].at(col, row) = up.y;
      labels.border_offsets[2].at(col, row) = down.x;
      labels.border_offsets[3].at(col, row) = down.y;
    }
  }
  return labels;
}

}  // namespace lomo::labelgen
