#include "lomo/geom.hpp"

#include <algorithm>
#include <numeric>

#include "lomo/error.hpp"

namespace lomo::geom {

namespace {

constexpr double kEps = 1e-12;

int orientation(Point a, Point b, Point c) {
  const double v = cross(b - a, c - a);
  const double scale = std::max({1.0, norm(b - a) * norm(c - a)});
  if (v > kEps * scale) return 1;
  if (v < -kEps * scale) return -1;
  return 0;
}

bool on_segment(Point p, Point a, Point b) {
  return std::min(a.x, b.x) - kEps <= p.x && p.x <= std::max(a.x, b.x) + kEps &&
         std::min(a.y, b.y) - kEps <= p.y && p.y <= std::max(a.y, b.y) + kEps;
}

bool segments_touch(Point a, Point b, Point c, Point d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(c, a, b)) return true;
  if (o2 == 0 && on_segment(d, a, b)) return true;
  if (o3 == 0 && on_segment(a, c, d)) return true;
  if (o4 == 0 && on_segment(b, c, d)) return true;
  return false;
}

// Clips a positively oriented convex polygon against another one.
std::vector<Point> clip_convex(std::vector<Point> subject, std::span<const Point> clip) {
  std::vector<Point> out;
  for (std::size_t i = 0; i < clip.size() && !subject.empty(); ++i) {
    const Point a = clip[i];
    const Point b = clip[(i + 1) % clip.size()];
    const Point edge = b - a;
    out.clear();
    for (std::size_t j = 0; j < subject.size(); ++j) {
      const Point p = subject[j];
      const Point q = subject[(j + 1) % subject.size()];
      const double sp = cross(edge, p - a);
      const double sq = cross(edge, q - a);
      if (sp >= 0) out.push_back(p);
      if ((sp >= 0) != (sq >= 0)) {
        const double t = sp / (sp - sq);
        out.push_back(p + (q - p) * t);
      }
    }
    subject.swap(out);
  }
  return subject;
}

double triangle_intersection(std::array<Point, 3> t, std::array<Point, 3> u) {
  if (signed_area(t) < 0) std::swap(t[1], t[2]);
  if (signed_area(u) < 0) std::swap(u[1], u[2]);
  const auto clipped = clip_convex({t.begin(), t.end()}, u);
  return clipped.size() < 3 ? 0.0 : std::abs(signed_area(clipped));
}

}  // namespace

Point normalized(Point a) {
  const double n = norm(a);
  return n > 0 ? a / n : Point{};
}

double signed_area(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * s;
}

double polygon_area(std::span<const Point> poly) { return std::abs(signed_area(poly)); }

bool is_simple(std::span<const Point> poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point a = poly[i];
    const Point b = poly[(i + 1) % n];
    if (distance(a, b) <= kEps) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const Point c = poly[j];
      const Point d = poly[(j + 1) % n];
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        // Adjacent edges share one endpoint; they may only overlap if they fold back.
        const Point shared = (j == i + 1) ? b : a;
        const Point p = (j == i + 1) ? a : b;
        const Point q = (j == i + 1) ? d : c;
        if (orientation(shared, p, q) == 0 && dot(p - shared, q - shared) > 0) return false;
        continue;
      }
      if (segments_touch(a, b, c, d)) return false;
    }
  }
  return true;
}

bool point_in_polygon(Point p, std::span<const Point> poly) {
  bool inside = false;
  const std::size_t n = poly.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point a = poly[i];
    const Point b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

double intersection_area(std::span<const Point> a, std::span<const Point> b) {
  if (a.size() < 3 || b.size() < 3) return 0.0;
  // Each polygon's indicator equals the signed sum of the indicators of its
  // fan triangles from a common origin, so the intersection area is the
  // signed sum of pairwise fan-triangle intersections.
  Point origin{};
  for (Point p : a) origin += p;
  for (Point p : b) origin += p;
  origin = origin / static_cast<double>(a.size() + b.size());

  double total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const std::array<Point, 3> ta{origin, a[i], a[(i + 1) % a.size()]};
    const double sa = signed_area(ta);
    if (sa == 0.0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) {
      const std::array<Point, 3> tb{origin, b[j], b[(j + 1) % b.size()]};
      const double sb = signed_area(tb);
      if (sb == 0.0) continue;
      const double inter = triangle_intersection(ta, tb);
      total += ((sa > 0) == (sb > 0)) ? inter : -inter;
    }
  }
  return std::abs(total);
}

double polygon_iou(std::span<const Point> a, std::span<const Point> b) {
  const double area_a = polygon_area(a);
  const double area_b = polygon_area(b);
  if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
  const double inter = std::min({intersection_area(a, b), area_a, area_b});
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

Point closest_on_segment(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = dot(ab, ab);
  if (len2 <= 0.0) return a;
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return a + ab * t;
}

ArbPolygon::ArbPolygon(std::vector<Point> vertices) : vertices_(std::move(vertices)) {
  if (vertices_.size() < 4 || vertices_.size() % 2 != 0)
    throw ValidationError("text polygon needs an even vertex count >= 4");
  for (Point p : vertices_)
    if (!is_finite(p)) throw ValidationError("text polygon has non-finite vertex");
}

ArbPolygon ArbPolygon::from_borders(std::span<const Point> upper, std::span<const Point> lower) {
  if (upper.size() != lower.size()) throw ValidationError("upper and lower borders differ in size");
  std::vector<Point> v(upper.begin(), upper.end());
  v.insert(v.end(), lower.rbegin(), lower.rend());
  return ArbPolygon(std::move(v));
}

std::vector<Point> ArbPolygon::upper_border() const {
  return {vertices_.begin(), vertices_.begin() + static_cast<std::ptrdiff_t>(pairs())};
}

std::vector<Point> ArbPolygon::lower_border() const {
  return {vertices_.rbegin(), vertices_.rbegin() + static_cast<std::ptrdiff_t>(pairs())};
}

std::array<Point, 4> canonical_order(std::array<Point, 4> pts) {
  if (signed_area(pts) < 0) std::reverse(pts.begin(), pts.end());
  std::size_t start = 0;
  for (std::size_t i = 1; i < 4; ++i) {
    const double si = pts[i].x + pts[i].y;
    const double ss = pts[start].x + pts[start].y;
    if (si < ss || (si == ss && pts[i].y < pts[start].y)) start = i;
  }
  std::rotate(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(start), pts.end());
  return pts;
}

Quadrangle Quadrangle::from_points(const std::array<Point, 4>& pts) {
  for (Point p : pts)
    if (!is_finite(p)) throw DegenerateShape("quadrangle has non-finite vertex");
  const auto v = canonical_order(pts);
  if (!(signed_area(v) > 0.0) || !is_simple(v))
    throw DegenerateShape("quadrangle is self-intersecting or has zero area");
  return Quadrangle(v);
}

Quadrangle Quadrangle::rect(double x0, double y0, double x1, double y1) {
  return from_points({Point{x0, y0}, Point{x1, y0}, Point{x1, y1}, Point{x0, y1}});
}

double Quadrangle::mean_width() const {
  return 0.5 * (distance(v_[0], v_[1]) + distance(v_[3], v_[2]));
}

double Quadrangle::mean_height() const {
  return 0.5 * (distance(v_[0], v_[3]) + distance(v_[1], v_[2]));
}

ArbPolygon Quadrangle::to_polygon() const { return ArbPolygon({v_[0], v_[1], v_[2], v_[3]}); }

Quadrangle shrink_quadrangle(const Quadrangle& q, double ratio) {
  if (!(ratio >= 0.0 && ratio < 0.5)) throw ValidationError("shrink ratio must lie in [0, 0.5)");
  if (ratio == 0.0) return q;
  const auto& v = q.vertices();
  std::array<Point, 4> out{};
  for (std::size_t i = 0; i < 4; ++i) {
    const Point next = v[(i + 1) % 4] - v[i];
    const Point prev = v[(i + 3) % 4] - v[i];
    const double r = std::min(norm(next), norm(prev));
    out[i] = v[i] + (normalized(next) + normalized(prev)) * (ratio * r);
  }
  return Quadrangle::from_points(out);
}

std::vector<Proposal> nms(std::span<const Proposal> proposals, double iou_threshold,
                          std::size_t keep) {
  std::vector<std::size_t> order(proposals.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return proposals[a].score > proposals[b].score;
  });
  std::vector<Proposal> kept;
  for (std::size_t idx : order) {
    if (kept.size() >= keep) break;
    const Proposal& cand = proposals[idx];
    const bool suppressed = std::any_of(kept.begin(), kept.end(), [&](const Proposal& k) {
      return polygon_iou(k.quad, cand.quad) > iou_threshold;
    });
    if (!suppressed) kept.push_back(cand);
  }
  return kept;
}

}  // namespace lomo::geom
