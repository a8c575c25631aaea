#pragma once

// Exact 2-D primitives used throughout the detector: points, canonical
// quadrangles, paired-border text polygons, areas, polygon IoU, EAST-style
// shrinking, and greedy polygon NMS.
//
// Coordinates are image pixels with y pointing down. "Clockwise" therefore
// means positive shoelace area: top-left -> top-right -> bottom-right ->
// bottom-left has signed area > 0.

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace lomo::geom {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
inline Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
inline Point operator-(Point a) { return {-a.x, -a.y}; }
inline Point operator*(Point a, double s) { return {a.x * s, a.y * s}; }
inline Point operator*(double s, Point a) { return {a.x * s, a.y * s}; }
inline Point operator/(Point a, double s) { return {a.x / s, a.y / s}; }
inline Point& operator+=(Point& a, Point b) { return a = a + b; }
inline Point& operator-=(Point& a, Point b) { return a = a - b; }

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }
inline bool is_finite(Point p) { return std::isfinite(p.x) && std::isfinite(p.y); }

/// Unit vector along `a`; the zero vector stays zero.
Point normalized(Point a);

/// Shoelace area, positive for clockwise-in-image vertex order.
double signed_area(std::span<const Point> poly);

/// Absolute shoelace area. Degenerate input yields 0.
double polygon_area(std::span<const Point> poly);

/// True when no two non-adjacent edges touch and no adjacent edges fold back.
bool is_simple(std::span<const Point> poly);

/// Even-odd containment test. Points exactly on the boundary may go either way.
bool point_in_polygon(Point p, std::span<const Point> poly);

/// Area of the intersection of two simple polygons of any convexity.
double intersection_area(std::span<const Point> a, std::span<const Point> b);

/// Intersection over union of two simple polygons; 0 when the union is empty.
double polygon_iou(std::span<const Point> a, std::span<const Point> b);

/// Closest point to `p` on segment [a, b].
Point closest_on_segment(Point p, Point a, Point b);

/// Text polygon with n upper-border points left->right followed by n
/// lower-border points right->left.
class ArbPolygon {
 public:
  ArbPolygon() = default;

  /// Throws ValidationError unless the vertex count is even, >= 4 and all finite.
  explicit ArbPolygon(std::vector<Point> vertices);

  /// Builds from both borders given left->right.
  static ArbPolygon from_borders(std::span<const Point> upper, std::span<const Point> lower);

  std::span<const Point> vertices() const { return vertices_; }
  std::size_t size() const { return vertices_.size(); }
  std::size_t pairs() const { return vertices_.size() / 2; }

  /// i-th upper border point, left->right.
  Point upper(std::size_t i) const { return vertices_[i]; }
  /// i-th lower border point, left->right (paired with upper(i)).
  Point lower(std::size_t i) const { return vertices_[vertices_.size() - 1 - i]; }

  std::vector<Point> upper_border() const;
  std::vector<Point> lower_border() const;

  double area() const { return polygon_area(vertices_); }
  bool simple() const { return is_simple(vertices_); }

  friend bool operator==(const ArbPolygon&, const ArbPolygon&) = default;

 private:
  std::vector<Point> vertices_;
};

/// Reorders four points into canonical order: clockwise in image coordinates,
/// starting from the vertex minimizing x+y (ties: smaller y). No validation.
std::array<Point, 4> canonical_order(std::array<Point, 4> pts);

/// Simple, positively oriented quadrangle in canonical vertex order.
class Quadrangle {
 public:
  /// Canonicalizes and validates; throws DegenerateShape for non-simple,
  /// zero-area or non-finite input.
  static Quadrangle from_points(const std::array<Point, 4>& pts);

  /// Axis-aligned rectangle with top-left (x0, y0) and bottom-right (x1, y1).
  static Quadrangle rect(double x0, double y0, double x1, double y1);

  const std::array<Point, 4>& vertices() const { return v_; }
  Point operator[](std::size_t i) const { return v_[i]; }

  double area() const { return signed_area(v_); }

  /// Mean length of the first/third edges (reading direction) and the
  /// second/fourth edges.
  double mean_width() const;
  double mean_height() const;

  /// Converts to a 2-pair text polygon (upper: v0,v1; lower: v3,v2).
  ArbPolygon to_polygon() const;

  friend bool operator==(const Quadrangle&, const Quadrangle&) = default;

 private:
  explicit Quadrangle(const std::array<Point, 4>& v) : v_(v) {}
  std::array<Point, 4> v_{};
};

inline double polygon_area(const ArbPolygon& p) { return p.area(); }
inline double polygon_iou(const ArbPolygon& a, const ArbPolygon& b) {
  return polygon_iou(a.vertices(), b.vertices());
}
inline double polygon_iou(const Quadrangle& a, const Quadrangle& b) {
  return polygon_iou(std::span<const Point>(a.vertices()), std::span<const Point>(b.vertices()));
}

/// Moves every vertex inward along both incident edges by
/// ratio * (shorter incident edge length). Requires 0 <= ratio < 0.5.
/// Throws DegenerateShape if the result is not a valid quadrangle.
Quadrangle shrink_quadrangle(const Quadrangle& q, double ratio);

/// A scored quadrangle travelling through NMS, refinement and reconstruction.
struct Proposal {
  Quadrangle quad;
  double score = 0.0;
};

/// Greedy NMS by descending score (stable on ties). A candidate is dropped
/// when its IoU with any kept proposal exceeds `iou_threshold`. At most
/// `keep` proposals are returned, in descending score order.
std::vector<Proposal> nms(std::span<const Proposal> proposals, double iou_threshold,
                          std::size_t keep);

}  // namespace lomo::geom
