#include "lomo/irm.hpp"

#include <cmath>

#include "lomo/error.hpp"

namespace lomo::irm {

using geom::Point;

FeatureGrid::FeatureGrid(int c, int h, int w, double fill) : channels(c), height(h), width(w) {
  if (c < 1 || h < 1 || w < 1) throw ValidationError("feature grid dimensions must be >= 1");
  values.assign(static_cast<std::size_t>(c) * static_cast<std::size_t>(h) *
                    static_cast<std::size_t>(w),
                fill);
}

RoiGrid roi_transform_grid(const geom::Quadrangle& quad, int out_h, int out_w) {
  RoiGrid g;
  g.layout = geom::RoiLayout::fit(quad, out_h, out_w);
  g.height = out_h;
  g.width = out_w;
  g.points.resize(static_cast<std::size_t>(out_h) * static_cast<std::size_t>(out_w));
  g.valid.assign(g.points.size(), 0);
  for (int row = 0; row < out_h; ++row) {
    for (int col = 0; col < out_w; ++col) {
      if (!g.layout.in_range(col, row)) continue;
      const std::size_t i = static_cast<std::size_t>(row * out_w + col);
      g.points[i] = g.layout.cell_to_image(col, row);
      g.valid[i] = 1;
    }
  }
  return g;
}

SampleGrid to_feature_coords(const SampleGrid& grid, double stride) {
  SampleGrid out = grid;
  for (Point& p : out.points) p = {p.x / stride - 0.5, p.y / stride - 0.5};
  return out;
}

FeatureGrid bilinear_sample(const FeatureGrid& feat, const SampleGrid& grid) {
  FeatureGrid out(feat.channels, grid.height, grid.width, 0.0);
  for (int row = 0; row < grid.height; ++row) {
    for (int col = 0; col < grid.width; ++col) {
      const std::size_t i = static_cast<std::size_t>(row * grid.width + col);
      if (!grid.valid[i]) continue;
      const Point p = grid.points[i];
      if (!geom::is_finite(p) || p.x < 0 || p.y < 0 || p.x > feat.width - 1 ||
          p.y > feat.height - 1)
        continue;
      const int x0 = std::min(static_cast<int>(std::floor(p.x)), feat.width - 1);
      const int y0 = std::min(static_cast<int>(std::floor(p.y)), feat.height - 1);
      const int x1 = std::min(x0 + 1, feat.width - 1);
      const int y1 = std::min(y0 + 1, feat.height - 1);
      const double fx = p.x - x0;
      const double fy = p.y - y0;
      for (int c = 0; c < feat.channels; ++c) {
        const double top = feat.at(c, y0, x0) * (1 - fx) + feat.at(c, y0, x1) * fx;
        const double bottom = feat.at(c, y1, x0) * (1 - fx) + feat.at(c, y1, x1) * fx;
        out.at(c, row, col) = top * (1 - fy) + bottom * fy;
      }
    }
  }
  return out;
}

std::array<std::vector<double>, 4> corner_aggregate(const FeatureGrid& f_r,
                                                    const CornerAttention& m_a) {
  if (f_r.height != m_a.height || f_r.width != m_a.width)
    throw DimMismatch("corner_aggregate: spatial dimensions differ");
  const std::size_t plane = static_cast<std::size_t>(f_r.height) * static_cast<std::size_t>(f_r.width);
  std::array<std::vector<double>, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    if (m_a.maps[i].size() != plane) throw DimMismatch("corner_aggregate: attention map size");
    out[i].assign(static_cast<std::size_t>(f_r.channels), 0.0);
    for (int c = 0; c < f_r.channels; ++c) {
      const double* f = f_r.values.data() + static_cast<std::size_t>(c) * plane;
      double s = 0.0;
      for (std::size_t k = 0; k < plane; ++k) s += f[k] * m_a.maps[i][k];
      out[i][static_cast<std::size_t>(c)] = s;
    }
  }
  return out;
}

CornerAttention gaussian_corner_attention(const geom::RoiLayout& layout, double sigma_cells) {
  CornerAttention m;
  m.height = layout.out_h;
  m.width = layout.out_w;
  const std::array<Point, 4> centers{Point{0, 0}, Point{layout.used_w - 1.0, 0},
                                     Point{layout.used_w - 1.0, layout.used_h - 1.0},
                                     Point{0, layout.used_h - 1.0}};
  const double inv = 1.0 / (2.0 * sigma_cells * sigma_cells);
  for (std::size_t i = 0; i < 4; ++i) {
    m.maps[i].assign(static_cast<std::size_t>(m.height) * static_cast<std::size_t>(m.width), 0.0);
    for (int row = 0; row < layout.used_h; ++row)
      for (int col = 0; col < layout.used_w; ++col) {
        const double dx = col - centers[i].x;
        const double dy = row - centers[i].y;
        m.maps[i][static_cast<std::size_t>(row * m.width + col)] = std::exp(-(dx * dx + dy * dy) * inv);
      }
  }
  return m;
}

geom::Quadrangle apply_corner_offsets(const geom::Quadrangle& quad, const Offsets8& offsets) {
  std::array<Point, 4> v = quad.vertices();
  for (std::size_t i = 0; i < 4; ++i) {
    if (!std::isfinite(offsets[2 * i]) || !std::isfinite(offsets[2 * i + 1]))
      throw DegenerateShape("non-finite corner offset");
    v[i] += Point{offsets[2 * i], offsets[2 * i + 1]};
  }
  return geom::Quadrangle::from_points(v);
}

Offsets8 make_offset_targets(const geom::Quadrangle& proposal, const geom::Quadrangle& gt) {
  Offsets8 out{};
  for (std::size_t i = 0; i < 4; ++i) {
    out[2 * i] = gt[i].x - proposal[i].x;
    out[2 * i + 1] = gt[i].y - proposal[i].y;
  }
  return out;
}

std::vector<geom::Proposal> refine(std::span<const geom::Proposal> proposals,
                                   const OffsetPredictor& predictor, const FeatureGrid& shared,
                                   int rt, RefineStats* stats) {
  if (rt < 0) throw ValidationError("refinement times must be >= 0");
  std::vector<geom::Proposal> out(proposals.begin(), proposals.end());
  for (auto& p : out) {
    for (int step = 0; step < rt; ++step) {
      try {
        p.quad = apply_corner_offsets(p.quad, predictor.predict(p.quad, shared));
      } catch (const DegenerateShape&) {
        if (stats) ++stats->degenerate_steps;
      }
    }
  }
  return out;
}

}  // namespace lomo::irm
