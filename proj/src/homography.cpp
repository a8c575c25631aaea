#include "lomo/homography.hpp"

#include <algorithm>
#include <cmath>

#include "lomo/error.hpp"

namespace lomo::geom {

Homography Homography::unit_square_to(const Quadrangle& quad) {
  const auto& p = quad.vertices();
  const double sx = p[0].x - p[1].x + p[2].x - p[3].x;
  const double sy = p[0].y - p[1].y + p[2].y - p[3].y;
  double g = 0.0;
  double h = 0.0;
  const double scale = std::max(1.0, std::abs(quad.area()));
  if (std::abs(sx) + std::abs(sy) > 1e-12 * std::sqrt(scale)) {
    const double dx1 = p[1].x - p[2].x;
    const double dx2 = p[3].x - p[2].x;
    const double dy1 = p[1].y - p[2].y;
    const double dy2 = p[3].y - p[2].y;
    const double den = dx1 * dy2 - dx2 * dy1;
    if (den == 0.0) throw DegenerateShape("quadrangle has no projective parameterization");
    g = (sx * dy2 - dx2 * sy) / den;
    h = (dx1 * sy - sx * dy1) / den;
  }
  return Homography({p[1].x - p[0].x + g * p[1].x, p[3].x - p[0].x + h * p[3].x, p[0].x,
                     p[1].y - p[0].y + g * p[1].y, p[3].y - p[0].y + h * p[3].y, p[0].y,
                     g, h, 1.0});
}

Point Homography::apply(Point p) const {
  const auto& m = m_;
  const double w = m[6] * p.x + m[7] * p.y + m[8];
  return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

Homography Homography::inverse() const {
  const auto& m = m_;
  const double a = m[4] * m[8] - m[5] * m[7];
  const double b = m[5] * m[6] - m[3] * m[8];
  const double c = m[3] * m[7] - m[4] * m[6];
  const double det = m[0] * a + m[1] * b + m[2] * c;
  if (det == 0.0) throw DegenerateShape("singular homography");
  const double inv = 1.0 / det;
  return Homography({a * inv, (m[2] * m[7] - m[1] * m[8]) * inv, (m[1] * m[5] - m[2] * m[4]) * inv,
                     b * inv, (m[0] * m[8] - m[2] * m[6]) * inv, (m[2] * m[3] - m[0] * m[5]) * inv,
                     c * inv, (m[1] * m[6] - m[0] * m[7]) * inv, (m[0] * m[4] - m[1] * m[3]) * inv});
}

RoiLayout RoiLayout::fit(const Quadrangle& quad, int out_h, int out_w) {
  if (out_h < 1 || out_w < 1) throw ValidationError("RoI block must be at least 1x1");
  const double height = quad.mean_height();
  const double width = quad.mean_width();
  if (!(height > 0.0) || !(width > 0.0) || !(quad.area() > 0.0))
    throw DegenerateShape("zero-area quadrangle has no RoI");
  RoiLayout r;
  r.out_h = out_h;
  r.out_w = out_w;
  r.used_h = out_h;
  const double aspect = width / height;
  r.used_w = aspect >= static_cast<double>(out_w) / out_h
                 ? out_w
                 : std::clamp(static_cast<int>(std::lround(out_h * aspect)), 1, out_w);
  r.unit_to_image = Homography::unit_square_to(quad);
  return r;
}

Point RoiLayout::cell_to_image(double col, double row) const {
  return unit_to_image.apply({(col + 0.5) / used_w, (row + 0.5) / used_h});
}

Point RoiLayout::image_to_cell(Point p) const {
  const Point u = unit_to_image.inverse().apply(p);
  return {u.x * used_w - 0.5, u.y * used_h - 0.5};
}

}  // namespace lomo::geom
